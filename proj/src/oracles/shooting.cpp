#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <stdexcept>

#include "ncdecay/oracles.hpp"

namespace ncdecay::oracle {

SturmLiouville selfsimilar_problem(double a, double k, double L0) {
    const double D = a / (k * L0 * L0);
    SturmLiouville s;
    s.alpha = 0.0;
    s.K = [D](double x) { return std::exp(x * x / (4.0 * D)); };
    s.P = [D](double x) { return D * std::exp(x * x / (4.0 * D)); };
    return s;
}

SturmLiouville critical_problem(double alpha, double k, double L0, double a) {
    const double m = 2.0 - alpha;
    const double c = std::pow(L0, m) * k / (a * m * m);
    const double scale = a * std::pow(L0, alpha - 2.0);
    SturmLiouville s;
    s.alpha = alpha;
    s.K = [c, m](double x) { return std::exp(c * std::pow(x, m)); };
    s.P = [c, m, alpha, scale](double x) {
        return scale * std::pow(x, alpha) * std::exp(c * std::pow(x, m));
    };
    return s;
}

ShootResult shoot(const SturmLiouville& p, double lambda, double x_start, double tol) {
    using State = std::array<double, 2>;
    namespace ode = boost::numeric::odeint;
    State y;
    double x0 = 0.0;
    if (p.alpha > 0.0) {
        x0 = x_start;
        y[0] = std::pow(x0, 1.0 - p.alpha);
        y[1] = p.P(x0) * (1.0 - p.alpha) * std::pow(x0, -p.alpha);
    } else {
        y[0] = 0.0;
        y[1] = 1.0;
    }
    auto rhs = [&](const State& s, State& d, double x) {
        d[0] = s[1] / p.P(x);
        d[1] = -lambda * p.K(x) * s[0];
    };
    ShootResult r;
    double last = y[0];
    auto observe = [&](const State& s, double) {
        if ((last > 0.0 && s[0] < 0.0) || (last < 0.0 && s[0] > 0.0)) ++r.zeros;
        if (s[0] != 0.0) last = s[0];
    };
    auto stepper = ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<State>());
    const double h0 = p.alpha > 0.0 ? x0 * 1e-3 : 1e-8;
    if (p.alpha == 0.0) last = 1.0;  // u > 0 just right of 0
    ode::integrate_adaptive(stepper, rhs, y, x0, 1.0, h0, observe);
    r.end_value = y[0];
    return r;
}

double shooting_eigenvalue(const SturmLiouville& p, int n, double x_start, double rel_tol) {
    if (n < 1) throw std::invalid_argument("eigen index must be >= 1");
    double lo = 0.0, hi = 1.0;
    while (shoot(p, hi, x_start).zeros < n) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("shooting: no bracket");
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (shoot(p, mid, x_start).zeros >= n) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace ncdecay::oracle
