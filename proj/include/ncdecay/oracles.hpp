#pragma once

// Independent reference computations used by tests, the verify suites and
// the acceptance runner. Nothing here reuses the library's discretisations.

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace ncdecay::oracle {

/// Coefficients of -(P u')' = lambda K u written out directly from their
/// closed forms. P(x) = P_scale x^alpha Khat(x).
struct SturmLiouville {
    double alpha = 0.0;
    std::function<double(double)> P;
    std::function<double(double)> K;
};

SturmLiouville selfsimilar_problem(double a, double k, double L0);
SturmLiouville critical_problem(double alpha, double k, double L0, double a = 1.0);

struct ShootResult {
    double end_value = 0.0;  ///< u(1)
    int zeros = 0;           ///< sign changes of u on (x_s, 1]
};

/// Integrates u' = w/P, w' = -lambda K u from x_s (Frobenius start u = x^{1-alpha}
/// when alpha > 0, else u = 0, P u' = 1 at 0) with adaptive Dormand-Prince.
ShootResult shoot(const SturmLiouville& p, double lambda, double x_start, double tol = 1e-13);

/// n-th eigenvalue by bisection on the zero count of u over [x_s, 1].
double shooting_eigenvalue(const SturmLiouville& p, int n, double x_start, double rel_tol = 1e-13);

struct VariationalResult {
    double value = 0.0;
    int sweeps = 0;
    std::vector<double> coefficients;
};

/// Minimises J(u) = ∫P u'^2 / ∫K u^2 over u = sum_j c_j sin(j pi x^{1-alpha}),
/// j = 1..modes, by coordinate-wise Brent line searches (no gradients).
VariationalResult variational_minimum(const SturmLiouville& p, int modes = 30,
                                      int max_sweeps = 400);

/// Adaptive Gauss-Kronrod ∫_a^b f (errors when it does not converge).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12);
/// Tanh-sinh quadrature for integrands with endpoint singularities.
double integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12);

/// Row i of the finite-volume operator assembled term by term: face means of x^alpha
/// by quadrature of x^{-alpha}, upwind drift. Returns {lower, diag, upper}.
std::array<double, 3> hand_assembled_row(const std::vector<double>& nodes, std::size_t i,
                                         double alpha, double p, double q,
                                         double regularization = 0.0);

/// Exact heat-semigroup image of a Gaussian c exp(-(x-m)^2/(2 s^2)).
double gaussian_heat_solution(double c, double m, double s, double a, double x, double t);

}  // namespace ncdecay::oracle
