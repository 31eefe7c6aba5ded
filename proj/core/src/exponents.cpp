#include "omht/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace omht {

namespace {

void require_count(const ProblemParams& p) {
    if (p.s < 1) {
        throw std::invalid_argument("ProblemParams: this bound needs an outlier count s >= 1");
    }
}

double sq(double v) { return v * v; }

}  // namespace

void ProblemParams::validate() const {
    if (m < 3) {
        throw std::invalid_argument("ProblemParams: need at least three sequences");
    }
    if (t_max < 1 || t_max > max_outliers(m)) {
        throw std::invalid_argument("ProblemParams: t_max must lie in [1, ceil(M/2)-1]");
    }
    if (s > t_max) {
        throw std::invalid_argument("ProblemParams: s must not exceed t_max");
    }
    if (!(k0 > 0.0) || !std::isfinite(k0)) {
        throw std::invalid_argument("ProblemParams: kernel bound k0 must be positive and finite");
    }
    if (!(mmd2 >= 0.0) || !std::isfinite(mmd2)) {
        throw std::invalid_argument("ProblemParams: mmd2 must be non-negative and finite");
    }
}

double ProblemParams::d2() const {
    return 32.0 * k0 * k0 * (1.0 + 1.0 / static_cast<double>(m - 2));
}

double ProblemParams::d1() const {
    if (m < t_max + 2) {
        throw std::invalid_argument("ProblemParams: need M - T - 1 >= 1");
    }
    return 32.0 * k0 * k0 * (1.0 + 1.0 / static_cast<double>(m - t_max - 1));
}

double ProblemParams::d2s() const {
    require_count(*this);
    if (m < s + 2) {
        throw std::invalid_argument("ProblemParams: need M - s - 1 >= 1");
    }
    return 32.0 * k0 * k0 * (1.0 + 1.0 / static_cast<double>(m - s - 1));
}

double ProblemParams::limit() const {
    require_count(*this);
    if (m < s + 2) {
        throw std::invalid_argument("ProblemParams: need M - s - 1 >= 1");
    }
    const double ratio = static_cast<double>(s) / static_cast<double>(m - s - 1);
    return sq(1.0 - ratio) * mmd2;
}

double ExponentReport::bayesian() const {
    return std::min({misclass, false_reject, false_alarm});
}

double g1(const ProblemParams& p, double y) { return sq(y) / p.d1(); }

double g2(const ProblemParams& p, double y) { return sq(p.limit() - y) / p.d2s(); }

ExponentReport bounds_fixed_single(const ProblemParams& p, double lambda) {
    p.validate();
    const double d2 = p.d2();
    ExponentReport r;
    r.misclass = sq(lambda) / d2;
    r.false_reject = lambda < p.mmd2 ? sq(p.mmd2 - lambda) / d2 : 0.0;
    r.false_alarm = sq(lambda) / d2;
    return r;
}

ExponentReport bounds_seq_single(const ProblemParams& p, double lambda1, double lambda2) {
    p.validate();
    const double d2 = p.d2();
    ExponentReport r;
    r.misclass = sq(lambda1) / d2;
    r.false_reject = sq(p.mmd2 - lambda2) / d2;
    r.false_alarm = sq(lambda1) / d2;
    const bool in_regime = lambda1 < p.mmd2;
    r.misclass_valid = in_regime;
    r.false_reject_valid = in_regime;
    return r;
}

ExponentReport bounds_twophase_single(const ProblemParams& p, double lambda1, double lambda2, double lambda3,
                                      std::size_t k) {
    p.validate();
    if (k < 1) {
        throw std::invalid_argument("bounds_twophase_single: k must be at least 1");
    }
    const double d2 = p.d2();
    const double kd = static_cast<double>(k);
    ExponentReport r;
    r.false_alarm = std::min(sq(lambda1), kd * sq(lambda3)) / d2;
    if (lambda1 < p.mmd2) {
        r.misclass = std::min(sq(lambda1), kd * sq(lambda3)) / d2;
        const double second_reject = lambda3 < p.mmd2 ? kd * sq(p.mmd2 - lambda3) : 0.0;
        r.false_reject = std::min(sq(p.mmd2 - lambda2), second_reject) / d2;
    } else {
        // Degenerate first phase: the bounds fall back to the fixed-length
        // ones with the second-phase threshold.
        r.misclass = sq(lambda3) / d2;
        r.false_reject = lambda3 < p.mmd2 ? sq(p.mmd2 - lambda3) / d2 : 0.0;
        r.misclass_valid = false;
        r.false_reject_valid = false;
    }
    return r;
}

ExponentReport bounds_fixed_multi(const ProblemParams& p, double lambda) {
    p.validate();
    require_count(p);
    ExponentReport r;
    r.false_alarm = g1(p, lambda);
    if (p.s > 1) {
        r.misclass = std::min(g1(p, lambda), g2(p, lambda));
        r.false_reject = g2(p, lambda);
        const bool in_regime = lambda < p.limit();
        r.misclass_valid = in_regime;
        r.false_reject_valid = in_regime;
    } else {
        r.misclass = g1(p, lambda);
        r.false_reject = sq(p.mmd2 - lambda) / p.d2();
        const bool in_regime = lambda < p.mmd2;
        r.misclass_valid = in_regime;
        r.false_reject_valid = in_regime;
    }
    return r;
}

ExponentReport bounds_seq_multi(const ProblemParams& p, double lambda1, double lambda2) {
    p.validate();
    require_count(p);
    ExponentReport r;
    r.false_alarm = g1(p, lambda1);
    if (p.s > 1) {
        r.misclass = std::min(g1(p, lambda1), g2(p, lambda2));
        r.false_reject = g2(p, lambda2);
        const bool in_regime = lambda1 < p.limit();
        r.misclass_valid = in_regime;
        r.false_reject_valid = in_regime;
    } else {
        r.misclass = g1(p, lambda1);
        r.false_reject = sq(p.mmd2 - lambda2) / p.d2();
        const bool in_regime = lambda1 < p.mmd2;
        r.misclass_valid = in_regime;
        r.false_reject_valid = in_regime;
    }
    return r;
}

ExponentReport bounds_twophase_multi(const ProblemParams& p, double lambda1, double lambda2, double lambda3,
                                     std::size_t k) {
    p.validate();
    require_count(p);
    if (k < 1) {
        throw std::invalid_argument("bounds_twophase_multi: k must be at least 1");
    }
    const double kd = static_cast<double>(k);
    const double lim = p.s > 1 ? p.limit() : p.mmd2;
    ExponentReport r;
    r.false_alarm = std::min(g1(p, lambda1), kd * g1(p, lambda3));
    if (lambda1 >= lim) {
        // Degenerate first phase: fall back to the fixed-length bounds with
        // the second-phase threshold.
        const ExponentReport fixed = bounds_fixed_multi(p, lambda3);
        r.misclass = fixed.misclass;
        r.false_reject = fixed.false_reject;
        r.misclass_valid = false;
        r.false_reject_valid = false;
        return r;
    }
    const bool in_regime = std::max(lambda1, lambda3) < lim;
    if (p.s > 1) {
        r.misclass = std::min({g1(p, lambda1), kd * g1(p, lambda3), g2(p, lambda2), kd * g2(p, lambda3)});
        r.false_reject = std::min(g2(p, lambda2), kd * g2(p, lambda3));
    } else {
        r.misclass = std::min(g1(p, lambda1), kd * g1(p, lambda3));
        r.false_reject = std::min(sq(p.mmd2 - lambda2), kd * sq(p.mmd2 - lambda3)) / p.d2();
    }
    r.misclass_valid = in_regime;
    r.false_reject_valid = in_regime;
    return r;
}

ExponentReport bounds_known_s(const ProblemParams& p, double lambda) {
    p.validate();
    require_count(p);
    const double d2s = p.d2s();
    ExponentReport r;
    r.misclass = sq(lambda) / d2s;
    r.false_reject = g2(p, lambda);
    r.false_alarm = sq(lambda) / d2s;
    return r;
}

// The suprema below run over thresholds in (0, MMD^2) for the single-outlier
// tests and (0, limit) for the multi-outlier ones, with the reject margin
// pinned at eps where the test has one.

double best_bayesian_fixed_single(const ProblemParams& p) {
    p.validate();
    return sq(p.mmd2) / (4.0 * p.d2());
}

double best_bayesian_seq_single(const ProblemParams& p, double eps) {
    p.validate();
    if (!(eps > 0.0) || !(eps < p.mmd2)) {
        throw std::invalid_argument("best_bayesian_seq_single: eps must lie in (0, mmd2)");
    }
    return sq(p.mmd2 - eps) / p.d2();
}

double best_bayesian_twophase_single(const ProblemParams& p, double eps, std::size_t k) {
    p.validate();
    if (!(eps > 0.0) || !(eps < p.mmd2)) {
        throw std::invalid_argument("best_bayesian_twophase_single: eps must lie in (0, mmd2)");
    }
    if (k < 1) {
        throw std::invalid_argument("best_bayesian_twophase_single: k must be at least 1");
    }
    const double kd = static_cast<double>(k);
    return std::min(sq(p.mmd2 - eps), kd * sq(p.mmd2) / 4.0) / p.d2();
}

double best_bayesian_fixed_multi(const ProblemParams& p) {
    p.validate();
    require_count(p);
    const double lim = p.limit();
    const double denom = sq(std::sqrt(p.d1()) + std::sqrt(p.d2s()));
    return sq(lim) / denom;
}

double best_bayesian_seq_multi(const ProblemParams& p, double eps) {
    p.validate();
    require_count(p);
    const double lim = p.limit();
    if (!(eps > 0.0) || !(eps < lim)) {
        throw std::invalid_argument("best_bayesian_seq_multi: eps must lie in (0, limit)");
    }
    return std::min(sq(lim) / p.d1(), sq(lim - eps) / p.d2s());
}

double best_bayesian_twophase_multi(const ProblemParams& p, double eps, std::size_t k) {
    p.validate();
    require_count(p);
    const double lim = p.limit();
    if (!(eps > 0.0) || !(eps < lim)) {
        throw std::invalid_argument("best_bayesian_twophase_multi: eps must lie in (0, limit)");
    }
    if (k < 1) {
        throw std::invalid_argument("best_bayesian_twophase_multi: k must be at least 1");
    }
    const double kd = static_cast<double>(k);
    const double denom = sq(std::sqrt(p.d1()) + std::sqrt(p.d2s()));
    return std::min({sq(lim) / p.d1(), kd * sq(lim) / denom, sq(lim - eps) / p.d2s()});
}

}  // namespace omht
