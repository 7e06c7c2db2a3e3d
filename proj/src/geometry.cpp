#include "ncdecay/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ncdecay/error.hpp"

namespace ncdecay {

namespace {

constexpr const char* kModule = "geometry";

void require_time(double t) {
    if (!(t >= 0.0)) throw InvalidArgument(kModule, "time must be nonnegative");
}

// (1 + kt)^e computed through log1p so that tiny kt keeps full precision.
double shifted_power(double k, double t, double e) { return std::exp(e * std::log1p(k * t)); }

}  // namespace

BoundaryLaw BoundaryLaw::make(double L0, double k, double gamma) {
    if (!(L0 > 0.0) || !std::isfinite(L0)) throw InvalidArgument(kModule, "L0 must be positive");
    if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument(kModule, "k must be positive");
    if (!std::isfinite(gamma)) throw InvalidArgument(kModule, "gamma must be finite");
    return BoundaryLaw{L0, k, gamma};
}

double BoundaryLaw::length(double t) const { return L0 * std::pow(1.0 + k * t, gamma); }

double BoundaryLaw::relative_rate(double t) const { return k * gamma / (1.0 + k * t); }

double boundary_length(const BoundaryLaw& law, double t) {
    require_time(t);
    return law.length(t);
}

BoundaryLaw critical_law(const BoundaryLaw& law, double alpha) {
    return BoundaryLaw{law.L0, law.k, gamma_critical(alpha)};
}

double alpha_weight(const BoundaryLaw& law, double t) {
    require_time(t);
    const double scale = 1.0 / (law.L0 * law.L0 * law.k);
    const double e = 1.0 - 2.0 * law.gamma;
    const double log_s = std::log1p(law.k * t);
    if (e == 0.0) return scale * log_s;
    // [(1+kt)^e - 1] / e without cancellation as e -> 0.
    return scale * std::expm1(e * log_s) / e;
}

void require_weak_degeneracy(double alpha, const char* module) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw InvalidArgument(module, "degeneracy exponent alpha must lie in [0, 1)");
}

double gamma_critical(double alpha) {
    require_weak_degeneracy(alpha, kModule);
    return 1.0 / (2.0 - alpha);
}

CoefficientSchedule transformed_coefficients(const BoundaryLaw& law, double alpha,
                                             double diffusion) {
    require_weak_degeneracy(alpha, kModule);
    if (!(diffusion > 0.0)) throw InvalidArgument(kModule, "diffusion constant must be positive");
    CoefficientSchedule s;
    s.alpha = alpha;
    s.p_of_t = [law, alpha, diffusion](double t) {
        return diffusion * std::pow(law.length(t), alpha - 2.0);
    };
    s.q_of_t = [law](double t) { return -law.k * law.gamma / (1.0 + law.k * t); };
    return s;
}

CoefficientSchedule frozen_coefficients(double L0, double alpha, double diffusion) {
    require_weak_degeneracy(alpha, kModule);
    if (!(L0 > 0.0)) throw InvalidArgument(kModule, "L0 must be positive");
    if (!(diffusion > 0.0)) throw InvalidArgument(kModule, "diffusion constant must be positive");
    const double p = diffusion * std::pow(L0 * 1.0, alpha - 2.0);
    CoefficientSchedule s;
    s.alpha = alpha;
    s.p_of_t = [p](double) { return p; };
    s.q_of_t = [](double) { return 0.0; };
    return s;
}

double to_reference(const BoundaryLaw& law, double xi, double t) { return xi / law.length(t); }

double to_physical(const BoundaryLaw& law, double x, double t) { return law.length(t) * x; }

std::string to_string(WeightKind kind) {
    switch (kind) {
        case WeightKind::alpha_integral: return "alpha-integral";
        case WeightKind::beta_subcritical: return "beta-subcritical";
        case WeightKind::beta_critical: return "beta-critical";
        case WeightKind::selfsimilar_gaussian: return "selfsimilar-gaussian";
        case WeightKind::critical_stretched: return "critical-stretched";
    }
    return "unknown";
}

WeightFunction WeightFunction::alpha_integral(const BoundaryLaw& law) {
    WeightFunction w;
    w.kind_ = WeightKind::alpha_integral;
    w.law_ = law;
    return w;
}

WeightFunction WeightFunction::selfsimilar_gaussian(double diffusion, double k, double L0) {
    if (!(diffusion > 0.0)) throw InvalidArgument(kModule, "diffusion constant must be positive");
    WeightFunction w;
    w.kind_ = WeightKind::selfsimilar_gaussian;
    w.law_ = BoundaryLaw::make(L0, k, 0.5);
    w.diffusion_ = diffusion;
    return w;
}

WeightFunction WeightFunction::critical_stretched(double alpha, double k, double L0,
                                                  double diffusion) {
    require_weak_degeneracy(alpha, kModule);
    if (!(diffusion > 0.0)) throw InvalidArgument(kModule, "diffusion constant must be positive");
    WeightFunction w;
    w.kind_ = WeightKind::critical_stretched;
    w.law_ = BoundaryLaw::make(L0, k, 1.0 / (2.0 - alpha));
    w.alpha_ = alpha;
    w.diffusion_ = diffusion;
    return w;
}

double WeightFunction::value(double s) const {
    switch (kind_) {
        case WeightKind::alpha_integral: return alpha_weight(law_, s);
        case WeightKind::beta_subcritical: {
            const double e = law_.gamma * (alpha_ - 2.0) + 1.0;
            return epsilon_ / (4.0 * law_.k * e) * shifted_power(law_.k, s, e);
        }
        case WeightKind::beta_critical: return epsilon_ / law_.k * std::log1p(law_.k * s);
        case WeightKind::selfsimilar_gaussian:
            return std::exp(law_.k * law_.L0 * law_.L0 * s * s / (4.0 * diffusion_));
        case WeightKind::critical_stretched: {
            const double m = 2.0 - alpha_;
            return std::exp(std::pow(law_.L0, m) * law_.k / (diffusion_ * m * m) * std::pow(s, m));
        }
    }
    return 0.0;
}

double WeightFunction::derivative(double s) const {
    switch (kind_) {
        case WeightKind::alpha_integral: return std::pow(law_.length(s), -2.0);
        case WeightKind::beta_subcritical:
            return 0.25 * epsilon_ * shifted_power(law_.k, s, law_.gamma * (alpha_ - 2.0));
        case WeightKind::beta_critical: return epsilon_ / (1.0 + law_.k * s);
        case WeightKind::selfsimilar_gaussian:
            return value(s) * law_.k * law_.L0 * law_.L0 * s / (2.0 * diffusion_);
        case WeightKind::critical_stretched: {
            const double m = 2.0 - alpha_;
            return value(s) * std::pow(law_.L0, m) * law_.k / (diffusion_ * m) *
                   std::pow(s, 1.0 - alpha_);
        }
    }
    return 0.0;
}

WeightFunction beta_subcritical(double alpha, const BoundaryLaw& law, double epsilon, double t0,
                                double diffusion) {
    require_weak_degeneracy(alpha, kModule);
    if (!(law.gamma * (alpha - 2.0) + 1.0 > 0.0))
        throw InvalidArgument(kModule,
                              "beta_subcritical requires gamma < 1/(2-alpha); use beta_critical");
    if (!(epsilon > 0.0)) throw InvalidArgument(kModule, "epsilon must be positive");
    require_time(t0);
    WeightFunction w;
    w.kind_ = WeightKind::beta_subcritical;
    w.law_ = law;
    w.alpha_ = alpha;
    w.diffusion_ = diffusion;
    w.epsilon_ = epsilon;
    w.t0_ = t0;
    return w;
}

double beta_critical_epsilon_cap(double alpha, const BoundaryLaw& law, double diffusion) {
    require_weak_degeneracy(alpha, kModule);
    return 0.25 * (1.0 - alpha) * (1.0 - alpha) * diffusion * std::pow(law.L0, alpha - 2.0);
}

WeightFunction beta_critical(double alpha, const BoundaryLaw& law, double epsilon,
                             double diffusion) {
    const double gc = gamma_critical(alpha);
    if (std::abs(law.gamma - gc) > 1e-12 * gc)
        throw InvalidArgument(kModule, "beta_critical requires gamma = 1/(2-alpha)");
    if (!(epsilon > 0.0)) throw InvalidArgument(kModule, "epsilon must be positive");
    if (epsilon > beta_critical_epsilon_cap(alpha, law, diffusion) * (1.0 + 1e-14))
        throw InvalidArgument(kModule, "epsilon exceeds (1-alpha)^2 a L0^{alpha-2} / 4");
    WeightFunction w;
    w.kind_ = WeightKind::beta_critical;
    w.law_ = law;
    w.alpha_ = alpha;
    w.diffusion_ = diffusion;
    w.epsilon_ = epsilon;
    return w;
}

namespace {

// Times 0 and (s - 1)/k for s log-spaced in [1 + 1e-8, 1e14].
std::vector<double> search_grid(double k) {
    constexpr int kPoints = 6000;
    std::vector<double> ts{0.0};
    const double lo = std::log(1e-8), hi = std::log(1e14);
    for (int i = 0; i < kPoints; ++i) {
        const double s_minus_one = std::exp(lo + (hi - lo) * i / (kPoints - 1));
        ts.push_back(s_minus_one / k);
    }
    return ts;
}

}  // namespace

AdmissiblePair admissible_epsilon(double alpha, const BoundaryLaw& law, double diffusion) {
    require_weak_degeneracy(alpha, kModule);
    const double e = law.gamma * (alpha - 2.0);
    if (!(e + 1.0 > 0.0))
        throw InvalidArgument(kModule, "admissible_epsilon requires gamma < 1/(2-alpha)");
    const auto sched = transformed_coefficients(law, alpha, diffusion);
    const double c = (1.0 - alpha) * (1.0 - alpha);

    if (law.gamma == 0.0) return {c * diffusion * std::pow(law.L0, alpha - 2.0), 0.0};

    const auto ts = search_grid(law.k);
    std::size_t first = ts.size();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts[i];
        if (4.0 * std::abs(sched.q(t)) <= 0.5 * c * sched.p(t)) {
            first = i;
            break;
        }
    }
    if (first == ts.size())
        throw NumericalFailure(kModule, "no admissible t0 within the search horizon");

    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = first; i < ts.size(); ++i) {
        const double t = ts[i];
        const double slack = (c * sched.p(t) - 4.0 * std::abs(sched.q(t))) *
                             shifted_power(law.k, t, -e);
        inf = std::min(inf, slack);
    }
    const AdmissiblePair pair{0.5 * inf, ts[first]};
    if (!(pair.epsilon > 0.0)) throw NumericalFailure(kModule, "admissible epsilon is not positive");

    // Verification on a dense uniform grid right after t0 and on the search grid.
    auto holds = [&](double t) {
        const double lhs = pair.epsilon * shifted_power(law.k, t, e) + 4.0 * std::abs(sched.q(t));
        return lhs <= c * sched.p(t) * (1.0 + 1e-12);
    };
    constexpr int kDense = 10000;
    for (int i = 0; i <= kDense; ++i)
        if (!holds(pair.t0 + 1e3 * i / kDense))
            throw NumericalFailure(kModule, "admissible pair failed dense verification");
    for (std::size_t i = first; i < ts.size(); ++i)
        if (!holds(ts[i])) throw NumericalFailure(kModule, "admissible pair failed verification");
    return pair;
}

bool is_admissible(const WeightFunction& beta, const CoefficientSchedule& schedule, double t_end,
                   int samples) {
    if (beta.kind() != WeightKind::beta_subcritical && beta.kind() != WeightKind::beta_critical)
        throw InvalidArgument(kModule, "admissibility applies to beta weights only");
    if (samples < 2) throw InvalidArgument(kModule, "need at least two samples");
    const double t0 = beta.t0();
    if (!(t_end >= t0)) throw InvalidArgument(kModule, "t_end must not precede t0");
    const double c = (1.0 - schedule.alpha) * (1.0 - schedule.alpha);
    for (int i = 0; i < samples; ++i) {
        const double t = t0 + (t_end - t0) * i / (samples - 1);
        const double lhs = 4.0 * (std::abs(beta.derivative(t)) + std::max(schedule.q(t), 0.0));
        if (lhs > c * schedule.p(t) * (1.0 + 1e-12)) return false;
    }
    return true;
}

}  // namespace ncdecay
