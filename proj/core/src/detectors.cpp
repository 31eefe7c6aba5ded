#include "omht/detectors.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace omht {

namespace {

struct SingleStats {
    std::size_t best = 0;
    double best_score = 0.0;
    double h = 0.0;
};

// min and second-min of the singleton scores; first index wins ties
SingleStats single_stats(const PairwiseKernelSums& cache) {
    const std::size_t m = cache.num_sequences();
    SingleStats st;
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t one[1] = {i};
        double v = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            v = std::max(v, cache.pair_mmd2(j, one));
        }
        if (v < best) {
            second = best;
            best = v;
            st.best = i;
        } else if (v < second) {
            second = v;
        }
    }
    st.best_score = best;
    st.h = second;
    return st;
}

Decision single_rule(const SingleStats& st, double lambda) {
    if (st.h > lambda) return Decision::of(CandidateSet({st.best}));
    return Decision::none();
}

struct MultiStats {
    std::vector<double> h;              // h[t-1] = h_t
    std::vector<CandidateSet> best;     // best[t-1] = minimizing set at size t
};

MultiStats multi_stats(const PairwiseKernelSums& cache, std::size_t t_max) {
    MultiStats st;
    st.h.reserve(t_max);
    st.best.reserve(t_max);
    for (std::size_t t = 1; t <= t_max; ++t) {
        ScoreTable tbl = cache.table(t);
        st.h.push_back(tbl.second_score);
        st.best.push_back(tbl.best_set());
    }
    return st;
}

Decision multi_rule(const MultiStats& st, double lambda_hi, double lambda_lo) {
    const std::size_t s = estimate_num_outliers(st.h, lambda_hi, lambda_lo);
    if (s == 0) return Decision::none();
    return Decision::of(st.best[s - 1]);
}

// stopping predicate for the unknown-count sequential test:
// some t has h_t > l1 with every later h below l2, or every h is below l2
bool multi_stop(std::span<const double> h, double l1, double l2) {
    bool suffix_below = true;
    for (std::size_t t = h.size(); t >= 1; --t) {
        if (h[t - 1] > l1 && suffix_below) return true;
        suffix_below = suffix_below && h[t - 1] < l2;
    }
    return suffix_below;
}

std::size_t resolve_t_max(std::size_t t_max, std::size_t m) {
    if (t_max == 0) return max_outliers(m);
    if (t_max > max_outliers(m)) throw std::invalid_argument("t_max larger than ceil(M/2)-1");
    return t_max;
}

void check_fixed_input(const ObservationSet& y) {
    if (y.length() < 2) throw std::invalid_argument("insufficient samples: need length >= 2");
}

// shared sequential driver: prime to N-1 columns, then step until `stop`
// says to halt or the horizon / stream end intervenes
template <typename StopFn, typename DecideFn>
StoppedDecision run_sequential(const KernelSpec& spec, SampleStream& stream, const SequentialConfig& cfg,
                               StopFn&& stop, DecideFn&& decide) {
    if (cfg.min_length < 3) throw std::invalid_argument("minimum length N must be >= 3");
    const std::size_t start = cfg.min_length - 1;
    const std::size_t horizon = cfg.resolved_horizon();
    if (horizon < start) throw std::invalid_argument("horizon must be >= N-1");

    PairwiseKernelSums cache(spec, ObservationSet(stream.num_sequences()));
    std::vector<double> column;
    while (cache.length() < start) {
        if (!stream.next(column)) throw std::runtime_error("stream exhausted before the minimum length N-1");
        cache.append_column(column);
    }

    while (true) {
        if (stop(cache)) return {decide(cache), cache.length(), false};
        if (cache.length() >= horizon || !stream.next(column))
            return {decide(cache), cache.length(), true};
        cache.append_column(column);
    }
}

}  // namespace

Decision fixed_length_single(const KernelSpec& spec, const ObservationSet& y, const FixedLengthConfig& cfg) {
    check_fixed_input(y);
    PairwiseKernelSums cache(spec, y);
    return single_rule(single_stats(cache), cfg.lambda);
}

StoppedDecision sequential_single(const KernelSpec& spec, SampleStream& stream, const SequentialConfig& cfg) {
    return run_sequential(
        spec, stream, cfg,
        [&](const PairwiseKernelSums& cache) {
            const SingleStats st = single_stats(cache);
            return st.h > cfg.lambda1 || st.h < cfg.lambda2;
        },
        [&](const PairwiseKernelSums& cache) { return single_rule(single_stats(cache), cfg.lambda1); });
}

StoppedDecision two_phase_single(const KernelSpec& spec, const ObservationSet& y, const TwoPhaseConfig& cfg) {
    if (cfg.factor < 1) throw std::invalid_argument("length factor K must be >= 1");
    if (cfg.phase1_length < 2) throw std::invalid_argument("first-phase length must be >= 2");
    if (y.length() != cfg.factor * cfg.phase1_length)
        throw std::invalid_argument("length mismatch: the observation set must hold K*n samples per sequence");

    PairwiseKernelSums cache(spec, y.prefix(cfg.phase1_length));
    const SingleStats st1 = single_stats(cache);
    if (st1.h > cfg.lambda1 || st1.h < cfg.lambda2)
        return {single_rule(st1, cfg.lambda1), cfg.phase1_length, false};

    std::vector<double> column(y.num_sequences());
    for (std::size_t a = cfg.phase1_length; a < y.length(); ++a) {
        for (std::size_t i = 0; i < column.size(); ++i) column[i] = y.value(i, a);
        cache.append_column(column);
    }
    return {single_rule(single_stats(cache), cfg.lambda3), y.length(), false};
}

std::size_t estimate_num_outliers(std::span<const double> h, double lambda_hi, double lambda_lo) {
    const std::size_t t_max = h.size();
    if (t_max == 0) throw std::invalid_argument("need statistics for at least one candidate size");

    if (lambda_hi == lambda_lo) {
        for (std::size_t t = t_max; t >= 1; --t)
            if (h[t - 1] > lambda_hi) return t;
        return 0;
    }
    for (std::size_t t = t_max; t >= 1; --t) {
        if (!(h[t - 1] > lambda_hi)) continue;
        bool later_below = true;
        for (std::size_t u = t + 1; u <= t_max; ++u)
            if (!(h[u - 1] < lambda_lo)) {
                later_below = false;
                break;
            }
        if (later_below) return t;
    }
    return 0;
}

Decision fixed_length_multi(const KernelSpec& spec, const ObservationSet& y, double lambda, std::size_t t_max) {
    check_fixed_input(y);
    t_max = resolve_t_max(t_max, y.num_sequences());
    PairwiseKernelSums cache(spec, y);
    return multi_rule(multi_stats(cache, t_max), lambda, lambda);
}

StoppedDecision sequential_multi(const KernelSpec& spec, SampleStream& stream, const SequentialConfig& cfg,
                                 std::size_t t_max) {
    t_max = resolve_t_max(t_max, stream.num_sequences());
    return run_sequential(
        spec, stream, cfg,
        [&](const PairwiseKernelSums& cache) {
            return multi_stop(multi_stats(cache, t_max).h, cfg.lambda1, cfg.lambda2);
        },
        [&](const PairwiseKernelSums& cache) {
            return multi_rule(multi_stats(cache, t_max), cfg.lambda1, cfg.lambda2);
        });
}

StoppedDecision two_phase_multi(const KernelSpec& spec, const ObservationSet& y, const TwoPhaseConfig& cfg,
                                std::size_t t_max) {
    if (cfg.factor < 1) throw std::invalid_argument("length factor K must be >= 1");
    if (cfg.phase1_length < 2) throw std::invalid_argument("first-phase length must be >= 2");
    if (y.length() != cfg.factor * cfg.phase1_length)
        throw std::invalid_argument("length mismatch: the observation set must hold K*n samples per sequence");
    t_max = resolve_t_max(t_max, y.num_sequences());

    PairwiseKernelSums cache(spec, y.prefix(cfg.phase1_length));
    const MultiStats st1 = multi_stats(cache, t_max);
    if (multi_stop(st1.h, cfg.lambda1, cfg.lambda2))
        return {multi_rule(st1, cfg.lambda1, cfg.lambda2), cfg.phase1_length, false};

    std::vector<double> column(y.num_sequences());
    for (std::size_t a = cfg.phase1_length; a < y.length(); ++a) {
        for (std::size_t i = 0; i < column.size(); ++i) column[i] = y.value(i, a);
        cache.append_column(column);
    }
    return {multi_rule(multi_stats(cache, t_max), cfg.lambda3, cfg.lambda3), y.length(), false};
}

Decision fixed_length_known_s(const KernelSpec& spec, const ObservationSet& y, double lambda, std::size_t s) {
    check_fixed_input(y);
    if (s < 1 || s > max_outliers(y.num_sequences()))
        throw std::invalid_argument("known outlier count out of range [1, ceil(M/2)-1]");
    PairwiseKernelSums cache(spec, y);
    ScoreTable tbl = cache.table(s);
    if (tbl.second_score > lambda) return Decision::of(tbl.best_set());
    return Decision::none();
}

Decision baseline_per_sequence(const KernelSpec& spec, const ObservationSet& y, double lambda) {
    check_fixed_input(y);
    PairwiseKernelSums cache(spec, y);
    std::vector<std::size_t> flagged;
    for (std::size_t i = 0; i < y.num_sequences(); ++i) {
        if (cache.pair_mmd2(i, {}) > lambda) flagged.push_back(i);
    }
    if (flagged.empty()) return Decision::none();
    return Decision::of(CandidateSet(std::move(flagged)));
}

}  // namespace omht
