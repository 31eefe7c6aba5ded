#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "omht/detectors.hpp"
#include "omht/random.hpp"

namespace omht {

// Which sequences carry the anomalous distribution in a synthetic run.
struct GroundTruth {
    std::vector<std::size_t> outliers;  // sorted, distinct
    GaussianSpec nominal{0.0, 1.0};
    GaussianSpec anomalous{1.0, 1.0};

    void validate(std::size_t m) const;
    bool contains(std::size_t index) const;
};

// Deterministic dataset: sequence i, position a is normal_sample(seed, i, a)
// under the nominal or anomalous law according to the truth. Datasets are
// prefix-nested in n: growing n appends columns without changing earlier ones.
ObservationSet gen_observations(std::uint64_t seed, std::size_t m, std::size_t n, const GroundTruth& truth);

enum class OutcomeClass { Correct, Misclassification, FalseReject, FalseAlarm };

OutcomeClass classify_outcome(const Decision& decision, const GroundTruth& truth);

enum class DetectorKind {
    FixedSingle,
    SequentialSingle,
    TwoPhaseSingle,
    FixedMulti,
    SequentialMulti,
    TwoPhaseMulti,
    KnownCount,
    Baseline,
};

const char* detector_kind_name(DetectorKind kind);

// One detector run specification. `n` is the fixed length, the first-phase
// length for the two-phase tests, or the minimum length N for the sequential
// ones. `horizon` (sequential only) defaults to 100*n when left 0; `t_max`
// left 0 means the ceil(M/2)-1 default.
struct DetectorPlan {
    DetectorKind kind = DetectorKind::FixedSingle;
    KernelSpec kernel = KernelSpec::gaussian(1.0);
    std::size_t m = 10;
    std::size_t n = 20;
    double lambda = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    std::size_t factor = 1;
    std::size_t t_max = 0;
    std::size_t s = 1;
    std::size_t horizon = 0;

    void validate() const;
    // Number of observation columns a trial generates up front.
    std::size_t generation_length() const;
};

struct TrialOutcome {
    OutcomeClass outcome = OutcomeClass::Correct;
    std::size_t tau = 0;
    bool stopped_by_horizon = false;
    double wall_ms = 0.0;  // detector run only; dataset generation excluded
    bool failed = false;
};

struct ErrorSummary {
    std::size_t trials = 0;  // attempted
    std::size_t failures = 0;
    std::size_t n_misclass = 0;
    std::size_t n_false_reject = 0;
    std::size_t n_false_alarm = 0;
    double err_misclass = 0.0;
    double err_false_reject = 0.0;
    double err_false_alarm = 0.0;
    double err_sum = 0.0;           // combined error rate across the three classes
    double ci_half_width = 0.0;     // Wilson 95% half-width of err_sum
    double mean_tau = 0.0;
    double tau_std = 0.0;           // sample standard deviation
    double mean_wall_ms = 0.0;
    std::size_t horizon_stops = 0;
    std::uint64_t base_seed = 0;
};

inline constexpr double wilson_z95 = 1.959963984540054;

double wilson_half_width(std::size_t successes, std::size_t total, double z = wilson_z95);

// Runs `trials` independent repetitions of the plan. Trial t draws its data
// from seed base_seed + t. `threads` 0 consults the OMHT_THREADS environment
// variable, defaulting to 1; aggregates are bit-identical for every thread
// count because records are reduced in trial order.
std::vector<TrialOutcome> run_trial_records(const DetectorPlan& plan, const GroundTruth& truth, std::size_t trials,
                                            std::uint64_t base_seed, unsigned threads = 0);

ErrorSummary summarize_trials(const std::vector<TrialOutcome>& records, std::uint64_t base_seed);

ErrorSummary run_trials(const DetectorPlan& plan, const GroundTruth& truth, std::size_t trials,
                        std::uint64_t base_seed, unsigned threads = 0);

// One grid point of an experiment sweep: a labeled plan plus the truth it
// runs against. `detector` and the param fields label the output row.
struct SweepPoint {
    std::string detector;
    std::string param_name;
    double param_value = 0.0;
    DetectorPlan plan;
    GroundTruth truth;
};

struct SweepRecord {
    SweepPoint point;
    ErrorSummary summary;
};

// Runs each grid point with its own disjoint seed block: point k uses base
// seed base_seed + k*trials, so no two trials anywhere share a seed.
std::vector<SweepRecord> sweep(const std::vector<SweepPoint>& points, std::size_t trials, std::uint64_t base_seed,
                               unsigned threads = 0);

}  // namespace omht
