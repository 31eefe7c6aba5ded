#pragma once

#include <cstddef>

#include "omht/scoring.hpp"

namespace omht {

// Setting for the theoretical error-exponent bounds: M sequences, admissible
// outlier count cap T, true outlier count s, kernel bound k0 and the
// population MMD^2 separating nominal from anomalous.
struct ProblemParams {
    std::size_t m = 3;
    std::size_t t_max = 1;
    std::size_t s = 1;
    double k0 = 1.0;
    double mmd2 = 0.0;

    void validate() const;

    double d2() const;   // 32 k0^2 (1 + 1/(M-2))
    double d1() const;   // 32 k0^2 (1 + 1/(M-T-1))
    double d2s() const;  // 32 k0^2 (1 + 1/(M-s-1)); needs s >= 1
    // separation the multi-outlier statistics converge to:
    // (1 - s/(M-s-1))^2 MMD^2; needs s >= 1
    double limit() const;
};

// Lower bounds on the three error exponents. A cleared flag marks a bound
// whose stated regime does not hold for the given thresholds (the value is
// still the stated formula, or the stated fallback where one exists).
struct ExponentReport {
    double misclass = 0.0;
    double false_reject = 0.0;
    double false_alarm = 0.0;
    bool misclass_valid = true;
    bool false_reject_valid = true;
    bool false_alarm_valid = true;

    double bayesian() const;  // min of the three bounds
};

// Exponent helper functions for the unknown-count tests.
double g1(const ProblemParams& p, double y);  // y^2 / d1
double g2(const ProblemParams& p, double y);  // (limit - y)^2 / d2s

// At most one outlier.
ExponentReport bounds_fixed_single(const ProblemParams& p, double lambda);
ExponentReport bounds_seq_single(const ProblemParams& p, double lambda1, double lambda2);
ExponentReport bounds_twophase_single(const ProblemParams& p, double lambda1, double lambda2, double lambda3,
                                      std::size_t k);

// Unknown number of outliers (up to t_max).
ExponentReport bounds_fixed_multi(const ProblemParams& p, double lambda);
ExponentReport bounds_seq_multi(const ProblemParams& p, double lambda1, double lambda2);
ExponentReport bounds_twophase_multi(const ProblemParams& p, double lambda1, double lambda2, double lambda3,
                                     std::size_t k);

// Known outlier count s.
ExponentReport bounds_known_s(const ProblemParams& p, double lambda);

// Best achievable Bayesian exponents over admissible thresholds, with the
// reject margin eps pinned where a margin applies. These are the exact
// suprema of the bounds above over their stated threshold ranges; the
// acceptance tests recover each one by grid maximization.
double best_bayesian_fixed_single(const ProblemParams& p);
double best_bayesian_seq_single(const ProblemParams& p, double eps);
double best_bayesian_twophase_single(const ProblemParams& p, double eps, std::size_t k);
double best_bayesian_fixed_multi(const ProblemParams& p);
double best_bayesian_seq_multi(const ProblemParams& p, double eps);
double best_bayesian_twophase_multi(const ProblemParams& p, double eps, std::size_t k);

}  // namespace omht
