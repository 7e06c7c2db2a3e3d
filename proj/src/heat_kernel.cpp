#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ncdecay/error.hpp"
#include "ncdecay/solver.hpp"

namespace ncdecay {

double heat_kernel_solution(const std::function<double(double)>& z0, double lo, double hi,
                            double a, double x, double t) {
    if (!(t > 0.0)) throw InvalidArgument("solver", "heat kernel needs t > 0");
    if (!(a > 0.0)) throw InvalidArgument("solver", "diffusion constant must be positive");
    if (!(hi > lo)) throw InvalidArgument("solver", "datum support must be a nonempty interval");
    const double four_at = 4.0 * a * t;
    auto f = [&](double v) {
        const double d = x - v;
        return z0(v) * std::exp(-d * d / four_at);
    };
    // The kernel has width sqrt(4at); split the support so narrow kernels are seen.
    const double width = std::sqrt(four_at);
    const double c_lo = std::clamp(x - 12.0 * width, lo, hi);
    const double c_hi = std::clamp(x + 12.0 * width, lo, hi);
    double sum = 0.0, err = 0.0;
    using boost::math::quadrature::gauss_kronrod;
    auto piece = [&](double a0, double b0) {
        if (!(b0 > a0)) return;
        // Unit-interval form keeps Boost's error estimate relative to the piece.
        const double h = b0 - a0;
        double e = 0.0;
        sum += h * gauss_kronrod<double, 61>::integrate([&](double u) { return f(a0 + h * u); }, 0.0, 1.0,
                                                        25, 1e-13, &e);
        err += h * e;
    };
    piece(lo, c_lo);
    piece(c_lo, c_hi);
    piece(c_hi, hi);
    const double value = sum / std::sqrt(std::numbers::pi * four_at);
    if (!std::isfinite(value) || err > 1e-8 * std::abs(sum) + 1e-15)
        throw NumericalFailure("solver", "heat-kernel quadrature did not converge");
    return value;
}

double heat_kernel_sup_bound(double z0_l1, double a, double t) {
    if (!(t > 0.0) || !(a > 0.0) || z0_l1 < 0.0)
        throw InvalidArgument("solver", "kernel bound needs t > 0, a > 0, |z0|_1 >= 0");
    return z0_l1 / std::sqrt(4.0 * std::numbers::pi * a * t);
}

}  // namespace ncdecay
