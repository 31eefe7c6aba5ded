#include "omht/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace omht {

namespace {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) {
        return std::min(requested, 256u);
    }
    if (const char* env = std::getenv("OMHT_THREADS")) {
        char* end = nullptr;
        const unsigned long parsed = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && parsed >= 1) {
            return static_cast<unsigned>(std::min<unsigned long>(parsed, 256));
        }
        throw std::invalid_argument("OMHT_THREADS must be a positive integer");
    }
    return 1;
}

bool decision_matches(const Decision& decision, const GroundTruth& truth) {
    if (!decision.is_outlier()) {
        return false;
    }
    return decision.outliers->indices == truth.outliers;
}

TrialOutcome run_one_trial(const DetectorPlan& plan, const GroundTruth& truth, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    const ObservationSet y = gen_observations(seed, plan.m, plan.generation_length(), truth);

    Decision decision;
    std::size_t tau = plan.n;
    bool horizon_stop = false;
    const auto start = clock::now();
    switch (plan.kind) {
        case DetectorKind::FixedSingle:
            decision = fixed_length_single(plan.kernel, y, FixedLengthConfig{plan.lambda});
            break;
        case DetectorKind::FixedMulti:
            decision = fixed_length_multi(plan.kernel, y, plan.lambda, plan.t_max);
            break;
        case DetectorKind::KnownCount:
            decision = fixed_length_known_s(plan.kernel, y, plan.lambda, plan.s);
            break;
        case DetectorKind::Baseline:
            decision = baseline_per_sequence(plan.kernel, y, plan.lambda);
            break;
        case DetectorKind::SequentialSingle: {
            ObservationStream stream(y);
            SequentialConfig cfg{plan.lambda1, plan.lambda2, plan.n, plan.horizon};
            const StoppedDecision r = sequential_single(plan.kernel, stream, cfg);
            decision = r.decision;
            tau = r.tau;
            horizon_stop = r.stopped_by_horizon;
            break;
        }
        case DetectorKind::SequentialMulti: {
            ObservationStream stream(y);
            SequentialConfig cfg{plan.lambda1, plan.lambda2, plan.n, plan.horizon};
            const StoppedDecision r = sequential_multi(plan.kernel, stream, cfg, plan.t_max);
            decision = r.decision;
            tau = r.tau;
            horizon_stop = r.stopped_by_horizon;
            break;
        }
        case DetectorKind::TwoPhaseSingle: {
            TwoPhaseConfig cfg{plan.lambda1, plan.lambda2, plan.lambda3, plan.factor, plan.n};
            const StoppedDecision r = two_phase_single(plan.kernel, y, cfg);
            decision = r.decision;
            tau = r.tau;
            break;
        }
        case DetectorKind::TwoPhaseMulti: {
            TwoPhaseConfig cfg{plan.lambda1, plan.lambda2, plan.lambda3, plan.factor, plan.n};
            const StoppedDecision r = two_phase_multi(plan.kernel, y, cfg, plan.t_max);
            decision = r.decision;
            tau = r.tau;
            horizon_stop = r.stopped_by_horizon;
            break;
        }
    }
    const auto stop = clock::now();

    TrialOutcome out;
    out.outcome = classify_outcome(decision, truth);
    out.tau = tau;
    out.stopped_by_horizon = horizon_stop;
    out.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    return out;
}

}  // namespace

void GroundTruth::validate(std::size_t m) const {
    nominal.validate();
    anomalous.validate();
    if (!std::is_sorted(outliers.begin(), outliers.end())) {
        throw std::invalid_argument("GroundTruth: outlier indices must be sorted");
    }
    if (std::adjacent_find(outliers.begin(), outliers.end()) != outliers.end()) {
        throw std::invalid_argument("GroundTruth: outlier indices must be distinct");
    }
    if (!outliers.empty() && outliers.back() >= m) {
        throw std::invalid_argument("GroundTruth: outlier index out of range");
    }
}

bool GroundTruth::contains(std::size_t index) const {
    return std::binary_search(outliers.begin(), outliers.end(), index);
}

ObservationSet gen_observations(std::uint64_t seed, std::size_t m, std::size_t n, const GroundTruth& truth) {
    if (m < 3) {
        throw std::invalid_argument("gen_observations: need at least three sequences");
    }
    if (n < 1) {
        throw std::invalid_argument("gen_observations: need at least one column");
    }
    truth.validate(m);
    std::vector<std::vector<double>> rows(m);
    for (std::size_t i = 0; i < m; ++i) {
        const GaussianSpec& spec = truth.contains(i) ? truth.anomalous : truth.nominal;
        rows[i].resize(n);
        for (std::size_t a = 0; a < n; ++a) {
            rows[i][a] = normal_sample(seed, i, a, spec);
        }
    }
    return ObservationSet::from_rows(std::move(rows));
}

OutcomeClass classify_outcome(const Decision& decision, const GroundTruth& truth) {
    if (truth.outliers.empty()) {
        return decision.is_outlier() ? OutcomeClass::FalseAlarm : OutcomeClass::Correct;
    }
    if (!decision.is_outlier()) {
        return OutcomeClass::FalseReject;
    }
    return decision_matches(decision, truth) ? OutcomeClass::Correct : OutcomeClass::Misclassification;
}

const char* detector_kind_name(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::FixedSingle: return "fixed";
        case DetectorKind::SequentialSingle: return "sequential";
        case DetectorKind::TwoPhaseSingle: return "two_phase";
        case DetectorKind::FixedMulti: return "fixed_multi";
        case DetectorKind::SequentialMulti: return "sequential_multi";
        case DetectorKind::TwoPhaseMulti: return "two_phase_multi";
        case DetectorKind::KnownCount: return "known_count";
        case DetectorKind::Baseline: return "baseline";
    }
    return "unknown";
}

void DetectorPlan::validate() const {
    kernel.validate();
    if (m < 3) {
        throw std::invalid_argument("DetectorPlan: need at least three sequences");
    }
    if (t_max != 0 && (t_max < 1 || t_max > max_outliers(m))) {
        throw std::invalid_argument("DetectorPlan: t_max must lie in [1, ceil(M/2)-1]");
    }
    switch (kind) {
        case DetectorKind::FixedSingle:
        case DetectorKind::FixedMulti:
        case DetectorKind::Baseline:
            if (n < 2) {
                throw std::invalid_argument("DetectorPlan: fixed-length tests need n >= 2");
            }
            FixedLengthConfig{lambda}.validate();
            break;
        case DetectorKind::KnownCount:
            if (n < 2) {
                throw std::invalid_argument("DetectorPlan: fixed-length tests need n >= 2");
            }
            FixedLengthConfig{lambda}.validate();
            if (s < 1 || s > max_outliers(m)) {
                throw std::invalid_argument("DetectorPlan: s must lie in [1, ceil(M/2)-1]");
            }
            break;
        case DetectorKind::SequentialSingle:
        case DetectorKind::SequentialMulti:
            SequentialConfig{lambda1, lambda2, n, horizon}.validate();
            break;
        case DetectorKind::TwoPhaseSingle:
        case DetectorKind::TwoPhaseMulti:
            TwoPhaseConfig{lambda1, lambda2, lambda3, factor, n}.validate();
            break;
    }
}

std::size_t DetectorPlan::generation_length() const {
    switch (kind) {
        case DetectorKind::SequentialSingle:
        case DetectorKind::SequentialMulti:
            return SequentialConfig{lambda1, lambda2, n, horizon}.resolved_horizon();
        case DetectorKind::TwoPhaseSingle:
        case DetectorKind::TwoPhaseMulti:
            return factor * n;
        default:
            return n;
    }
}

double wilson_half_width(std::size_t successes, std::size_t total, double z) {
    if (total == 0) {
        return 0.0;
    }
    const double n = static_cast<double>(total);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    return (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

std::vector<TrialOutcome> run_trial_records(const DetectorPlan& plan, const GroundTruth& truth, std::size_t trials,
                                            std::uint64_t base_seed, unsigned threads) {
    plan.validate();
    truth.validate(plan.m);
    const unsigned workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(trials, 1));

    std::vector<TrialOutcome> records(trials);
    auto work = [&](std::size_t t) {
        try {
            records[t] = run_one_trial(plan, truth, base_seed + t);
        } catch (const std::exception&) {
            records[t] = TrialOutcome{};
            records[t].failed = true;
        }
    };

    if (workers <= 1 || trials <= 1) {
        for (std::size_t t = 0; t < trials; ++t) {
            work(t);
        }
        return records;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t t = next.fetch_add(1, std::memory_order_relaxed);
                if (t >= trials) {
                    return;
                }
                work(t);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    return records;
}

ErrorSummary summarize_trials(const std::vector<TrialOutcome>& records, std::uint64_t base_seed) {
    ErrorSummary s;
    s.trials = records.size();
    s.base_seed = base_seed;

    std::size_t completed = 0;
    double tau_sum = 0.0;
    double wall_sum = 0.0;
    for (const TrialOutcome& r : records) {
        if (r.failed) {
            ++s.failures;
            continue;
        }
        ++completed;
        switch (r.outcome) {
            case OutcomeClass::Correct: break;
            case OutcomeClass::Misclassification: ++s.n_misclass; break;
            case OutcomeClass::FalseReject: ++s.n_false_reject; break;
            case OutcomeClass::FalseAlarm: ++s.n_false_alarm; break;
        }
        if (r.stopped_by_horizon) {
            ++s.horizon_stops;
        }
        tau_sum += static_cast<double>(r.tau);
        wall_sum += r.wall_ms;
    }
    if (completed == 0) {
        return s;
    }
    const double denom = static_cast<double>(completed);
    s.err_misclass = static_cast<double>(s.n_misclass) / denom;
    s.err_false_reject = static_cast<double>(s.n_false_reject) / denom;
    s.err_false_alarm = static_cast<double>(s.n_false_alarm) / denom;
    const std::size_t n_err = s.n_misclass + s.n_false_reject + s.n_false_alarm;
    s.err_sum = static_cast<double>(n_err) / denom;
    s.ci_half_width = wilson_half_width(n_err, completed);
    s.mean_tau = tau_sum / denom;
    s.mean_wall_ms = wall_sum / denom;

    if (completed >= 2) {
        double ss = 0.0;
        for (const TrialOutcome& r : records) {
            if (r.failed) {
                continue;
            }
            const double d = static_cast<double>(r.tau) - s.mean_tau;
            ss += d * d;
        }
        s.tau_std = std::sqrt(ss / (denom - 1.0));
    }
    return s;
}

ErrorSummary run_trials(const DetectorPlan& plan, const GroundTruth& truth, std::size_t trials,
                        std::uint64_t base_seed, unsigned threads) {
    return summarize_trials(run_trial_records(plan, truth, trials, base_seed, threads), base_seed);
}

std::vector<SweepRecord> sweep(const std::vector<SweepPoint>& points, std::size_t trials, std::uint64_t base_seed,
                               unsigned threads) {
    std::vector<SweepRecord> out;
    out.reserve(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k) * trials;
        SweepRecord rec;
        rec.point = points[k];
        rec.summary = run_trials(points[k].plan, points[k].truth, trials, seed, threads);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace omht
