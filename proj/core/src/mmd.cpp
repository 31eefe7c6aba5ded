#include "omht/mmd.hpp"

#include <cmath>
#include <stdexcept>

namespace omht {

namespace {

void check_sample(std::span<const double> v, const char* side) {
    if (v.size() < 2) throw std::invalid_argument(std::string("insufficient samples on ") + side + " side (need >= 2)");
    for (double t : v)
        if (!std::isfinite(t)) throw std::invalid_argument("sample entries must be finite");
}

// Size-then-content ordering; picks a canonical operand order so the
// statistic is bit-identical under argument swap.
bool lex_less(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

double within_sum(const KernelSpec& spec, std::span<const double> v) {
    CompensatedSum acc;
    for (std::size_t j = 1; j < v.size(); ++j) {
        double local = 0.0;
        for (std::size_t i = 0; i < j; ++i) local += spec(v[i], v[j]);
        acc.add(2.0 * local);
    }
    return acc.value();
}

double cross_sum(const KernelSpec& spec, std::span<const double> a, std::span<const double> b) {
    CompensatedSum acc;
    for (double vb : b) {
        double local = 0.0;
        for (double va : a) local += spec(va, vb);
        acc.add(local);
    }
    return acc.value();
}

}  // namespace

double mmd2_unbiased(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    spec.validate();
    check_sample(x, "first");
    check_sample(y, "second");

    const bool swapped = lex_less(y, x);
    const std::span<const double> a = swapped ? y : x;
    const std::span<const double> b = swapped ? x : y;

    const double saa = within_sum(spec, a);
    const double sbb = within_sum(spec, b);
    const double sab = cross_sum(spec, a, b);

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ta = saa / (na * (na - 1.0));
    const double tb = sbb / (nb * (nb - 1.0));

    const double tx = swapped ? tb : ta;
    const double ty = swapped ? ta : tb;
    return (tx + ty) - 2.0 * sab / (na * nb);
}

double mmd2_population_gaussian(const KernelSpec& spec, const GaussianSpec& f1, const GaussianSpec& f2) {
    spec.validate();
    if (spec.kind != KernelKind::Gaussian)
        throw std::invalid_argument("unsupported: closed form requires the Gaussian kernel");
    f1.validate();
    f2.validate();

    const double s2 = spec.sigma0 * spec.sigma0;
    const auto expected_k = [s2](double v1, double v2, double dm) {
        const double denom = s2 + v1 + v2;
        return std::sqrt(s2 / denom) * std::exp(-(dm * dm) / (2.0 * denom));
    };
    return expected_k(f1.var, f1.var, 0.0) - 2.0 * expected_k(f1.var, f2.var, f1.mean - f2.mean) +
           expected_k(f2.var, f2.var, 0.0);
}

double mmd2_population_mc(const KernelSpec& spec,
                          const std::function<double(std::uint64_t)>& sample1,
                          const std::function<double(std::uint64_t)>& sample2,
                          std::size_t pairs) {
    spec.validate();
    if (pairs == 0) throw std::invalid_argument("Monte-Carlo budget must be positive");
    CompensatedSum kxx, kyy, kxy;
    for (std::uint64_t r = 0; r < pairs; ++r) {
        const double x1 = sample1(4 * r), x2 = sample1(4 * r + 1), x3 = sample1(4 * r + 2);
        const double y1 = sample2(4 * r), y2 = sample2(4 * r + 1), y3 = sample2(4 * r + 2);
        kxx.add(spec(x1, x2));
        kyy.add(spec(y1, y2));
        kxy.add(spec(x3, y3));
    }
    const double inv = 1.0 / static_cast<double>(pairs);
    return kxx.value() * inv - 2.0 * kxy.value() * inv + kyy.value() * inv;
}

PairMmdState::PairMmdState(KernelSpec spec) : spec_(spec) { spec_.validate(); }

void PairMmdState::append_x(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("sample entries must be finite");
    double local = 0.0;
    for (double t : xs_) local += spec_(t, v);
    sxx_.add(2.0 * local);
    double cross = 0.0;
    for (double t : ys_) cross += spec_(v, t);
    sxy_.add(cross);
    xs_.push_back(v);
}

void PairMmdState::append_y(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("sample entries must be finite");
    double local = 0.0;
    for (double t : ys_) local += spec_(t, v);
    syy_.add(2.0 * local);
    double cross = 0.0;
    for (double t : xs_) cross += spec_(t, v);
    sxy_.add(cross);
    ys_.push_back(v);
}

double PairMmdState::mmd2() const {
    if (xs_.size() < 2 || ys_.size() < 2)
        throw std::invalid_argument("insufficient samples: need >= 2 points per side");
    const double n1 = static_cast<double>(xs_.size());
    const double n2 = static_cast<double>(ys_.size());
    return sxx_.value() / (n1 * (n1 - 1.0)) + syy_.value() / (n2 * (n2 - 1.0)) -
           2.0 * sxy_.value() / (n1 * n2);
}

}  // namespace omht
