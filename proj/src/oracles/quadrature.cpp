#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ncdecay/oracles.hpp"

namespace ncdecay::oracle {

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    double err = 0.0, l1 = 0.0;
    const double h = b - a;
    const double v = h * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double u) { return f(a + h * u); }, 0.0, 1.0, 20, rel_tol * 0.1, &err, &l1);
    err *= std::abs(h);
    l1 *= std::abs(h);
    if (!(err <= rel_tol * std::max(std::abs(v), 1e-300) + 1e-300) && err > rel_tol * l1)
        throw std::runtime_error("oracle quadrature did not converge");
    return v;
}

double integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double rel_tol) {
    boost::math::quadrature::tanh_sinh<double> ts(15);
    double err = 0.0, l1 = 0.0;
    const double v = ts.integrate(f, a, b, rel_tol, &err, &l1);
    if (err > std::max(1e-9, 10.0 * rel_tol) * l1) throw std::runtime_error("oracle tanh-sinh did not converge");
    return v;
}

std::array<double, 3> hand_assembled_row(const std::vector<double>& x, std::size_t i, double alpha,
                                         double p, double q, double regularization) {
    if (i == 0 || i + 1 >= x.size()) return {0.0, 0.0, 0.0};
    // Conductance of edge [x_j, x_{j+1}]: p * (mean of x^alpha) / length, the
    // mean being length / ∫ x^{-alpha}.
    auto conductance = [&](std::size_t j) {
        const double len = x[j + 1] - x[j];
        double inv = len;
        if (alpha != 0.0)
            inv = integrate_singular([&](double s) { return std::pow(s, -alpha); }, x[j], x[j + 1],
                                     1e-13);
        return (p * len / inv + regularization) / len;
    };
    const double width = 0.5 * (x[i + 1] - x[i - 1]);
    double lo = conductance(i - 1) / width;
    double up = conductance(i) / width;
    const double v = -q * x[i];  // u_t = ... + v u_x
    if (v > 0.0) up += v / (x[i + 1] - x[i]);
    if (v < 0.0) lo -= v / (x[i] - x[i - 1]);
    return {lo, -(lo + up), up};
}

double gaussian_heat_solution(double c, double m, double s, double a, double x, double t) {
    const double var = s * s + 2.0 * a * t;
    return c * s / std::sqrt(var) * std::exp(-(x - m) * (x - m) / (2.0 * var));
}

}  // namespace ncdecay::oracle
