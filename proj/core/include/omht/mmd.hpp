#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "omht/kernel.hpp"

namespace omht {

// Scalar Gaussian distribution N(mean, var).
struct GaussianSpec {
    double mean = 0.0;
    double var = 1.0;

    void validate() const {
        if (!(var > 0.0) || !std::isfinite(var) || !std::isfinite(mean))
            throw std::invalid_argument("Gaussian spec requires finite mean and variance > 0");
    }
};

// Neumaier compensated accumulator. Deterministic for a fixed sequence of
// adds; keeps O(n^2) kernel sums accurate to ~1 ulp independent of length.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// Unbiased MMD^2 U-statistic between two scalar samples; requires at least
// two points per side. Evaluation order is canonicalized internally so that
// swapping the arguments returns the bit-identical value.
double mmd2_unbiased(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

// Population MMD^2 between two scalar Gaussians under the Gaussian kernel,
// via the closed-form integral
//   E[k(X,Y)] = sqrt(s0^2/(s0^2+v1+v2)) * exp(-(m1-m2)^2 / (2(s0^2+v1+v2))).
double mmd2_population_gaussian(const KernelSpec& spec, const GaussianSpec& f1, const GaussianSpec& f2);

// Monte-Carlo population estimate for arbitrary scalar samplers: averages
// k(X,X'), k(Y,Y') and k(X,Y) over `pairs` independent draws from each
// sampler. Fallback for distribution pairs without a closed form.
double mmd2_population_mc(const KernelSpec& spec,
                          const std::function<double(std::uint64_t)>& sample1,
                          const std::function<double(std::uint64_t)>& sample2,
                          std::size_t pairs);

// Incremental state for the pair statistic: retains both samples and the
// three kernel sums so each appended point costs O(n1 + n2).
class PairMmdState {
  public:
    explicit PairMmdState(KernelSpec spec);

    void append_x(double v);
    void append_y(double v);

    std::size_t n1() const { return xs_.size(); }
    std::size_t n2() const { return ys_.size(); }
    double sxx() const { return sxx_.value(); }  // sum over ordered pairs i != j
    double syy() const { return syy_.value(); }
    double sxy() const { return sxy_.value(); }  // full cross sum
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }

    // Statistic from the current sums; throws until both sides have >= 2 points.
    double mmd2() const;

  private:
    KernelSpec spec_;
    std::vector<double> xs_, ys_;
    CompensatedSum sxx_, syy_, sxy_;
};

}  // namespace omht
