#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ncdecay/grid.hpp"

namespace ncdecay {

enum class EigenKind {
    selfsimilar,          ///< -(D p phi')' = mu p phi, p(eta) = exp(eta^2 / (4D)), D = a/(k L0^2)
    degenerate_critical,  ///< -(P u')' = lambda K u with stretched-exponential K
    custom,               ///< user-supplied c x^alpha K(x) and K(x)
};

std::string to_string(EigenKind kind);

/// Weighted Sturm-Liouville problem -(P u')' = lambda K u on (0, 1) with
/// u(0) = u(1) = 0, where P(x) = c x^alpha K(x) and K is smooth and positive.
class EigenProblem {
public:
    static EigenProblem selfsimilar(double a, double k, double L0);
    static EigenProblem degenerate_critical(double alpha, double k, double L0, double a = 1.0);
    static EigenProblem custom(double alpha, double prefactor, std::function<double(double)> K);

    EigenKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double diffusion() const { return a_; }
    double k() const { return k_; }
    double L0() const { return L0_; }
    /// c in P = c x^alpha K.
    double prefactor() const { return c_; }

    double K(double x) const { return K_(x); }
    double P(double x) const;

    /// Exponent of (1 + kt) in the separable solution's decay: mu for the
    /// self-similar kind, lambda/k for the critical kind. Custom problems have none.
    double decay_power(double eigenvalue) const;

private:
    EigenKind kind_ = EigenKind::custom;
    double alpha_ = 0.0;
    double a_ = 1.0;
    double k_ = 0.0;
    double L0_ = 1.0;
    double c_ = 1.0;
    std::function<double(double)> K_;
};

struct EigenPair {
    EigenKind kind = EigenKind::custom;
    int index = 0;  ///< 1-based
    double eigenvalue = 0.0;
    std::vector<double> values;  ///< on the grid, endpoints 0
    double weighted_norm = 0.0;  ///< discrete K-norm (1 after normalisation)
    double sup_norm = 0.0;
    double l2_norm = 0.0;        ///< unweighted discrete L2(0, 1)
};

/// Discrete pencil S u = lambda M u on the interior nodes.
///
/// S: two-point fluxes with face conductance c K(mid) (e / ∫ x^{-alpha});
/// M: average of the lumped and the consistent linear-element K-mass.
struct Pencil {
    std::vector<double> s_diag, s_off;  ///< s_off[i] couples interior i and i+1
    std::vector<double> m_diag, m_off;
};

Pencil assemble_pencil(const EigenProblem& problem, const Grid& grid);

/// The m smallest eigenpairs, K-orthonormal, first interior node positive.
/// Writes a warning to stderr when m > N/4.
std::vector<EigenPair> solve_eigen(const EigenProblem& problem, const Grid& grid, int m);

/// (u,u)_H / (u,u)_K with the pencil's discrete inner products.
double rayleigh_quotient(const EigenProblem& problem, const Grid& grid, std::span<const double> u);

/// Discrete (u, v)_K and (u, v)_H.
double inner_K(const Pencil& pencil, std::span<const double> u, std::span<const double> v);
double inner_H(const Pencil& pencil, std::span<const double> u, std::span<const double> v);

/// CSV export: kind,n,eigenvalue,weighted_norm,sup_norm.
void write_eigenpairs_csv(std::ostream& out, std::span<const EigenPair> pairs);
/// CSV export of one eigenfunction: x,phi.
void write_eigenfunction_csv(std::ostream& out, const Grid& grid, const EigenPair& pair);

struct SeparableSnapshot {
    double t = 0.0;
    double factor = 1.0;         ///< (1+kt)^{-decay_power}
    double length = 0.0;         ///< physical domain length at t
    std::vector<double> values;  ///< factor * phi on the reference grid
    double sup_norm = 0.0;
    double l2_norm = 0.0;        ///< reference-interval L2
    double weighted_norm = 0.0;
};

/// Exact separable solution generated by one eigenpair; both kinds live on
/// the reference interval (eta = x for the self-similar kind at gamma = 1/2).
SeparableSnapshot separable_solution(const EigenProblem& problem, const EigenPair& pair,
                                     const Grid& grid, double t);

}  // namespace ncdecay
