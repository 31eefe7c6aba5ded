#pragma once

#include <optional>
#include <span>
#include <vector>

#include "omht/observations.hpp"
#include "omht/scoring.hpp"

namespace omht {

// Test output: a declared outlier set, or the no-outlier verdict.
struct Decision {
    std::optional<CandidateSet> outliers;

    bool is_outlier() const { return outliers.has_value(); }
    static Decision none() { return {}; }
    static Decision of(CandidateSet b) {
        Decision d;
        d.outliers = std::move(b);
        return d;
    }

    friend bool operator==(const Decision&, const Decision&) = default;
};

struct FixedLengthConfig {
    double lambda = 0.0;

    void validate() const {
        if (!(lambda > 0.0)) throw std::invalid_argument("threshold lambda must be positive");
    }
};

struct SequentialConfig {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::size_t min_length = 3;  // N
    std::size_t horizon = 0;     // hard cap on n; 0 resolves to 100*N

    std::size_t resolved_horizon() const { return horizon == 0 ? 100 * min_length : horizon; }

    // Enforced by config-driven entry points, not by the detector itself
    // (the degenerate lambda1 <= lambda2 case is a meaningful input).
    void validate() const {
        if (!(lambda1 > lambda2) || !(lambda2 > 0.0))
            throw std::invalid_argument("sequential thresholds require lambda1 > lambda2 > 0");
        if (min_length < 3) throw std::invalid_argument("minimum length N must be >= 3");
        if (resolved_horizon() < min_length - 1)
            throw std::invalid_argument("horizon must be >= N-1");
    }
};

struct TwoPhaseConfig {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    std::size_t factor = 1;         // K
    std::size_t phase1_length = 2;  // n

    void validate() const {
        if (!(lambda1 > lambda2)) throw std::invalid_argument("two-phase thresholds require lambda1 > lambda2");
        if (!(lambda3 > 0.0)) throw std::invalid_argument("threshold lambda3 must be positive");
        if (factor < 1) throw std::invalid_argument("length factor K must be >= 1");
        if (phase1_length < 2) throw std::invalid_argument("first-phase length must be >= 2");
    }
};

struct StoppedDecision {
    Decision decision;
    std::size_t tau = 0;
    bool stopped_by_horizon = false;
};

// One new sample per sequence per step.
class SampleStream {
  public:
    virtual ~SampleStream() = default;
    virtual std::size_t num_sequences() const = 0;
    // Fills one column; returns false when exhausted.
    virtual bool next(std::vector<double>& column) = 0;
};

// Replays the columns of a fixed observation set.
class ObservationStream final : public SampleStream {
  public:
    explicit ObservationStream(const ObservationSet& y) : y_(&y) {}

    std::size_t num_sequences() const override { return y_->num_sequences(); }

    bool next(std::vector<double>& column) override {
        if (pos_ >= y_->length()) return false;
        column.resize(y_->num_sequences());
        for (std::size_t i = 0; i < column.size(); ++i) column[i] = y_->value(i, pos_);
        ++pos_;
        return true;
    }

  private:
    const ObservationSet* y_;
    std::size_t pos_ = 0;
};

// Declares {i*} when the second-smallest singleton score exceeds lambda.
Decision fixed_length_single(const KernelSpec& spec, const ObservationSet& y, const FixedLengthConfig& cfg);

// Grows the data one column per step from n = N-1 on, stopping as soon as
// h > lambda1 or h < lambda2; decides with the fixed-length rule at
// threshold lambda1. Hitting the horizon (or stream exhaustion past N-1)
// stops with the same rule and sets the flag.
StoppedDecision sequential_single(const KernelSpec& spec, SampleStream& stream, const SequentialConfig& cfg);

// Reads the first n of the K*n provided samples; decides at n with lambda1
// when h leaves (lambda2, lambda1], otherwise at K*n with lambda3.
StoppedDecision two_phase_single(const KernelSpec& spec, const ObservationSet& y, const TwoPhaseConfig& cfg);

// Estimated outlier count from h_1..h_T (h[t-1] = h_t): the t whose h
// exceeds lambda_hi while every later h falls below lambda_lo; 0 when no t
// qualifies. Equal thresholds use the equivalent max{t : h_t > lambda} form.
std::size_t estimate_num_outliers(std::span<const double> h, double lambda_hi, double lambda_lo);

// Unknown-count tests: estimate s from the h statistics, then declare the
// size-s minimizing set. t_max = 0 means ceil(M/2)-1.
Decision fixed_length_multi(const KernelSpec& spec, const ObservationSet& y, double lambda, std::size_t t_max = 0);
StoppedDecision sequential_multi(const KernelSpec& spec, SampleStream& stream, const SequentialConfig& cfg,
                                 std::size_t t_max = 0);
StoppedDecision two_phase_multi(const KernelSpec& spec, const ObservationSet& y, const TwoPhaseConfig& cfg,
                                std::size_t t_max = 0);

// Known outlier count: threshold h_s and declare the size-s minimizer.
Decision fixed_length_known_s(const KernelSpec& spec, const ObservationSet& y, double lambda, std::size_t s);

// Per-sequence baseline: flags every sequence whose MMD^2 against the pool
// of all others exceeds lambda (one statistic per sequence). The flagged set
// may exceed ceil(M/2)-1; it is reported as-is.
Decision baseline_per_sequence(const KernelSpec& spec, const ObservationSet& y, double lambda);

}  // namespace omht
