#pragma once

#include <functional>
#include <limits>
#include <string>

namespace ncdecay {

/// Moving endpoint l(t) = L0 (1 + k t)^gamma.
struct BoundaryLaw {
    double L0 = 1.0;
    double k = 1.0;
    double gamma = 0.0;

    /// Validating constructor; throws InvalidArgument unless L0 > 0 and k > 0.
    static BoundaryLaw make(double L0, double k, double gamma);

    double length(double t) const;
    /// l'(t) / l(t) = k gamma / (1 + k t).
    double relative_rate(double t) const;
};

double boundary_length(const BoundaryLaw& law, double t);

/// The critical law with the same L0 and k and exponent 1/(2 - alpha).
BoundaryLaw critical_law(const BoundaryLaw& law, double alpha);

/// alpha(t) = ∫_0^t l(τ)^{-2} dτ in closed form (both branches).
double alpha_weight(const BoundaryLaw& law, double t);

/// 1 / (2 - alpha); alpha must lie in [0, 1).
double gamma_critical(double alpha);

/// Throws InvalidArgument unless 0 <= alpha < 1.
void require_weak_degeneracy(double alpha, const char* module);

/// Coefficients of the equation on the reference interval,
///   u_t - p(t) (x^alpha u_x)_x + q(t) x u_x = 0.
struct CoefficientSchedule {
    double alpha = 0.0;
    std::function<double(double)> p_of_t;
    std::function<double(double)> q_of_t;

    double p(double t) const { return p_of_t(t); }
    double q(double t) const { return q_of_t(t); }
};

/// p(t) = a l(t)^{alpha-2}, q(t) = -k gamma / (1 + k t).
CoefficientSchedule transformed_coefficients(const BoundaryLaw& law, double alpha,
                                             double diffusion = 1.0);

/// Constant p = a L0^{alpha-2}, q = 0: the cylindrical problem on (0, L0).
CoefficientSchedule frozen_coefficients(double L0, double alpha, double diffusion = 1.0);

/// x = xi / l(t).
double to_reference(const BoundaryLaw& law, double xi, double t);
/// xi = l(t) x.
double to_physical(const BoundaryLaw& law, double x, double t);

enum class WeightKind {
    alpha_integral,
    beta_subcritical,
    beta_critical,
    selfsimilar_gaussian,
    critical_stretched,
};

std::string to_string(WeightKind kind);

/// Closed-form weight evaluator plus the constants that define it.
///
/// Time weights (alpha_integral, beta_*) are evaluated at a time t; the
/// spatial weights (selfsimilar_gaussian p(eta), critical_stretched K(x))
/// at a point of [0, 1]. Instances are immutable values.
class WeightFunction {
public:
    static WeightFunction alpha_integral(const BoundaryLaw& law);
    static WeightFunction selfsimilar_gaussian(double diffusion, double k, double L0);
    static WeightFunction critical_stretched(double alpha, double k, double L0,
                                             double diffusion = 1.0);

    WeightKind kind() const { return kind_; }
    const BoundaryLaw& law() const { return law_; }
    double alpha() const { return alpha_; }
    double diffusion() const { return diffusion_; }
    double epsilon() const { return epsilon_; }
    /// Left end of the interval on which the weight is declared admissible.
    double t0() const { return t0_; }

    double value(double s) const;
    double derivative(double s) const;

private:
    friend WeightFunction beta_subcritical(double, const BoundaryLaw&, double, double, double);
    friend WeightFunction beta_critical(double, const BoundaryLaw&, double, double);

    WeightKind kind_ = WeightKind::alpha_integral;
    BoundaryLaw law_{};
    double alpha_ = 0.0;
    double diffusion_ = 1.0;
    double epsilon_ = 0.0;
    double t0_ = 0.0;
};

/// beta(t) = eps / (4k[gamma(alpha-2)+1]) (1+kt)^{gamma(alpha-2)+1}; rejects
/// gamma >= 1/(2-alpha). Admissibility on [t0, inf) is the caller's claim and is
/// checked by is_admissible.
WeightFunction beta_subcritical(double alpha, const BoundaryLaw& law, double epsilon, double t0,
                                double diffusion = 1.0);

/// beta(t) = (eps/k) ln(1 + kt) at gamma = 1/(2-alpha); rejects
/// 4 eps > (1-alpha)^2 a L0^{alpha-2}.
WeightFunction beta_critical(double alpha, const BoundaryLaw& law, double epsilon,
                             double diffusion = 1.0);

/// Largest epsilon accepted by beta_critical.
double beta_critical_epsilon_cap(double alpha, const BoundaryLaw& law, double diffusion = 1.0);

struct AdmissiblePair {
    double epsilon = 0.0;
    double t0 = 0.0;
};

/// Constructive (epsilon, t0) with eps (1+kt)^{gamma(alpha-2)} + 4|q| <= (1-alpha)^2 p
/// for all t >= t0. Throws NumericalFailure when the search bounds are exhausted.
AdmissiblePair admissible_epsilon(double alpha, const BoundaryLaw& law, double diffusion = 1.0);

/// Pointwise admissibility 4(|beta_t| + max(q, 0)) <= (1-alpha)^2 p(t) on
/// `samples` uniformly spaced times of [t0, t_end]. For q >= 0 this is the
/// plain condition with |q|; for q < 0 the drift term only helps.
bool is_admissible(const WeightFunction& beta, const CoefficientSchedule& schedule, double t_end,
                   int samples = 10000);

}  // namespace ncdecay
