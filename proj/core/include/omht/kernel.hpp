#pragma once

#include <cmath>
#include <stdexcept>

namespace omht {

enum class KernelKind { Gaussian };

// Bounded kernel. Only the Gaussian kernel exp(-(x-y)^2 / (2 sigma0^2)) is
// provided; its maximum value k0 is exactly 1.
struct KernelSpec {
    KernelKind kind = KernelKind::Gaussian;
    double sigma0 = 1.0;
    double k0 = 1.0;

    static KernelSpec gaussian(double sigma0) {
        KernelSpec spec;
        spec.kind = KernelKind::Gaussian;
        spec.sigma0 = sigma0;
        spec.k0 = 1.0;
        spec.validate();
        return spec;
    }

    void validate() const {
        if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
            throw std::invalid_argument("kernel bandwidth sigma0 must be positive and finite");
        if (!(k0 > 0.0)) throw std::invalid_argument("kernel bound k0 must be positive");
        if (kind == KernelKind::Gaussian && k0 != 1.0)
            throw std::invalid_argument("Gaussian kernel bound must be exactly 1");
    }

    // Unchecked evaluation for hot loops; inputs assumed finite.
    double operator()(double x, double y) const {
        const double d = x - y;
        return std::exp(-(d * d) / (2.0 * sigma0 * sigma0));
    }
};

// Checked evaluation; rejects non-finite inputs.
inline double eval_kernel(const KernelSpec& spec, double x, double y) {
    spec.validate();
    if (!std::isfinite(x) || !std::isfinite(y))
        throw std::invalid_argument("kernel inputs must be finite");
    return spec(x, y);
}

}  // namespace omht
