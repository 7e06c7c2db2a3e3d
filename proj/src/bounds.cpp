#include "ncdecay/bounds.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "ncdecay/csv.hpp"
#include "ncdecay/error.hpp"

namespace ncdecay {

namespace {

constexpr const char* kModule = "bounds";
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_half(double gamma) { return std::abs(gamma - 0.5) <= 1e-14; }

void require_inputs(double rho, double norm, double T) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument(kModule, "rho must be positive");
    if (!(norm >= 0.0)) throw InvalidArgument(kModule, "initial norm must be nonnegative");
    if (!(T > 0.0)) throw InvalidArgument(kModule, "T must be positive");
}

// log(e^x - 1) for x > 0 without overflow.
double log_expm1(double x) {
    if (x > 30.0) return x + std::log1p(-std::exp(-x));
    return std::log(std::expm1(x));
}

// Union of uniform and log-uniform breakpoints on [a, b]; log spacing uses 1 + kt.
std::vector<double> breakpoints(double a, double b, double k) {
    constexpr int pieces = 32;
    std::vector<double> t;
    t.reserve(2 * pieces + 2);
    for (int i = 0; i <= pieces; ++i) t.push_back(a + (b - a) * i / pieces);
    const double la = std::log1p(k * a), lb = std::log1p(k * b);
    for (int i = 1; i < pieces; ++i) t.push_back(std::expm1(la + (lb - la) * i / pieces) / k);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

// log ∫_a^b exp(g(t)) dt by piecewise adaptive Gauss-Kronrod with g shifted
// by its sampled maximum. Pieces are split until g changes by O(1) across
// each, so steep exponents (shrinking domains) stay cheap; pieces sitting
// far below the maximum are dropped.
template <class G>
double log_integral(G g, double a, double b, double k) {
    struct Piece {
        double lo, hi, glo, ghi;
    };
    std::vector<Piece> todo, pieces;
    const auto t0 = breakpoints(a, b, k);
    double M = -kInf;  // running maximum of the samples seen so far
    for (std::size_t i = 0; i + 1 < t0.size(); ++i) {
        todo.push_back({t0[i], t0[i + 1], g(t0[i]), g(t0[i + 1])});
        M = std::max({M, todo.back().glo, todo.back().ghi});
    }
    constexpr double drop = 100.0;  // e^-100 of the peak is invisible at 1e-10
    while (!todo.empty()) {
        Piece p = todo.back();
        todo.pop_back();
        const double mid = 0.5 * (p.lo + p.hi);
        const double gm = g(mid);
        M = std::max(M, gm);
        if (std::max({p.glo, p.ghi, gm}) < M - drop) continue;
        const bool steep = std::abs(p.ghi - p.glo) > 2.0 || std::abs(gm - 0.5 * (p.glo + p.ghi)) > 0.5;
        if (steep && mid > p.lo && mid < p.hi && pieces.size() + todo.size() < 200000) {
            todo.push_back({p.lo, mid, p.glo, gm});
            todo.push_back({mid, p.hi, gm, p.ghi});
        } else {
            pieces.push_back(p);
        }
    }
    if (!std::isfinite(M)) throw NumericalFailure(kModule, "bound integrand is not finite");
    using boost::math::quadrature::gauss_kronrod;
    double sum = 0.0, err = 0.0;
    auto f = [&](double s) { return std::exp(g(s) - M); };
    for (const auto& p : pieces) {
        if (std::max(p.glo, p.ghi) < M - drop) continue;
        // Integrate on [0, 1]: Boost's error estimate does not scale with the width.
        const double h = p.hi - p.lo;
        double e = 0.0;
        sum += h * gauss_kronrod<double, 61>::integrate([&](double u) { return f(p.lo + h * u); }, 0.0, 1.0,
                                                        12, 1e-13, &e);
        err += h * e;
    }
    if (!(sum > 0.0) || !std::isfinite(sum) || err > 1e-10 * sum)
        throw NumericalFailure(kModule, "bound quadrature did not converge");
    return M + std::log(sum);
}

}  // namespace

double log_master_integral(double rho, const BoundaryLaw& law, double T) {
    require_inputs(rho, 0.0, T);
    const double L0 = law.L0, k = law.k, gam = law.gamma;
    if (gam > 0.5 && !is_half(gam)) {
        // alpha is bounded, so the exponent stays moderate in t.
        auto g = [&](double t) { return rho * alpha_weight(law, t) - std::log(law.length(t)); };
        return log_integral(g, 0.0, T, k);
    }
    // Substituting u = alpha(t), dt = l^2 du, and v = alpha(T) - u keeps the
    // exponent exact when rho alpha(T) is huge: I = e^{rho alpha(T)} ∫ e^{-rho v} l dv
    // with l written in closed form as a function of u.
    const double aT = alpha_weight(law, T);
    const double kl = k * L0 * L0;
    auto log_l = [&](double u) {
        if (is_half(gam)) return std::log(L0) + 0.5 * kl * u;
        const double e = 1.0 - 2.0 * gam;
        return std::log(L0) + gam / e * std::log1p(kl * e * u);
    };
    auto g = [&](double v) { return -rho * v + log_l(aT - v); };
    return rho * aT + log_integral(g, 0.0, aT, rho);
}

double master_integral_half(double rho, const BoundaryLaw& law, double T) {
    require_inputs(rho, 0.0, T);
    if (!is_half(law.gamma)) throw InvalidArgument(kModule, "closed form needs gamma = 1/2");
    const double L0 = law.L0, k = law.k;
    const double e = rho / (L0 * L0 * k) + 0.5;
    return 2.0 * L0 / (2.0 * rho + L0 * L0 * k) * std::expm1(e * std::log1p(k * T));
}

double log_master_bound_nondegenerate(double rho, const BoundaryLaw& law, double norm_y0,
                                      double T) {
    require_inputs(rho, norm_y0, T);
    if (norm_y0 == 0.0) return -kInf;
    return std::log(norm_y0) - 0.5 * (std::log(rho) + log_master_integral(rho, law, T));
}

double master_bound_nondegenerate(double rho, const BoundaryLaw& law, double norm_y0, double T) {
    if (T == 0.0 && rho > 0.0 && norm_y0 >= 0.0) return kInf;
    return std::exp(log_master_bound_nondegenerate(rho, law, norm_y0, T));
}

double l2_bound(double rho, const BoundaryLaw& law, double norm_y0, double T) {
    if (!(rho >= 0.0)) throw InvalidArgument(kModule, "rho must be nonnegative");
    if (!(norm_y0 >= 0.0)) throw InvalidArgument(kModule, "initial norm must be nonnegative");
    return std::exp(-0.5 * rho * alpha_weight(law, T)) * norm_y0;
}

double comparison_datum_l1(double L0, double sup_y0) {
    if (!(L0 > 0.0) || !(sup_y0 >= 0.0)) throw InvalidArgument(kModule, "bad comparison datum");
    return 1.5 * L0 * sup_y0;
}

double regime_threshold(double rho, const BoundaryLaw& law) {
    if (!(rho > 0.0)) throw InvalidArgument(kModule, "rho must be positive");
    const double L0 = law.L0, k = law.k, g = law.gamma;
    const double ln2 = std::numbers::ln2;
    if (g <= 0.0) return ln2 * L0 * L0 * (1.0 - 2.0 * g) / rho;
    if (is_half(g)) {
        const double e = rho / (L0 * L0 * k) + 0.5;
        return std::expm1(ln2 / e) / k;
    }
    if (g > 0.5) return 0.0;
    // 0 < gamma < 1/2: e^{rho alpha(T)} >= 2 and alpha(T) >= c' T^{1-2g} / 2.
    const double e = 1.0 - 2.0 * g;
    const double T1 = std::expm1(std::log1p(e * L0 * L0 * k * ln2 / rho) / e) / k;
    const double cp = 1.0 / (L0 * L0 * e * std::pow(k, 2.0 * g));
    auto ok = [&](double T) { return alpha_weight(law, T) >= 0.5 * cp * std::pow(T, e); };
    double hi = 1.0 / k;
    while (!ok(hi)) {
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericalFailure(kModule, "no regime threshold found");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return std::max(T1, hi);
}

RegimeBound regime_bound(double rho, const BoundaryLaw& law, double norm_y0, double T,
                         std::optional<KernelEnvelope> kernel) {
    require_inputs(rho, norm_y0, T);
    const double L0 = law.L0, k = law.k, g = law.gamma;
    RegimeBound r;
    r.threshold = regime_threshold(rho, law);
    if (T < r.threshold)
        throw InvalidArgument(kModule, "T = " + format_real(T) + " is below the regime threshold " +
                                           format_real(r.threshold));
    if (g <= 0.0) {
        const double d = L0 * (1.0 - 2.0 * g);
        r.tier = Tier::exponential;
        r.value = std::sqrt(2.0 / d) * std::exp(-0.5 * rho * T / (L0 * d)) * norm_y0;
    } else if (is_half(g)) {
        r.tier = Tier::polynomial;
        const double c = L0 * rho / (2.0 * rho + L0 * L0 * k);
        r.value = std::exp(-(rho / (2.0 * L0 * L0 * k) + 0.25) * std::log1p(k * T)) * norm_y0 /
                  std::sqrt(c);
    } else if (g < 0.5) {
        const double e = 1.0 - 2.0 * g;
        const double cp = 1.0 / (L0 * L0 * e * std::pow(k, 2.0 * g));
        r.tier = Tier::subexponential;
        r.value = std::sqrt(2.0 / L0) * std::exp(-0.25 * rho * cp * std::pow(T, e)) * norm_y0;
    } else {
        if (!kernel) throw InvalidArgument(kModule, "gamma > 1/2 needs the kernel envelope data");
        r.tier = Tier::polynomial;
        r.value = heat_kernel_sup_bound(kernel->z0_l1, kernel->diffusion, T);
    }
    return r;
}

// ---------------------------------------------------------------- degenerate

namespace {

bool closed_form_applies(const CoefficientSchedule& schedule, const WeightFunction& beta, double t0,
                         double T) {
    if (beta.kind() != WeightKind::beta_subcritical && beta.kind() != WeightKind::beta_critical)
        return false;
    if (schedule.alpha != beta.alpha()) return false;
    for (double t : {t0, 0.5 * (t0 + T), T}) {
        const double expect = beta.diffusion() * std::pow(beta.law().length(t), beta.alpha() - 2.0);
        if (std::abs(schedule.p(t) - expect) > 1e-12 * expect) return false;
    }
    return true;
}

// log of e^{-beta(t0)} ∫_{t0}^T e^{beta} p dt.
double log_weighted_integral(const CoefficientSchedule& schedule, const WeightFunction& beta,
                             double t0, double T, DegenerateIntegral method) {
    const bool closed = method == DegenerateIntegral::closed_form ||
                        (method == DegenerateIntegral::automatic &&
                         closed_form_applies(schedule, beta, t0, T));
    if (method == DegenerateIntegral::closed_form && !closed_form_applies(schedule, beta, t0, T))
        throw InvalidArgument(kModule, "closed form needs p and beta from the same boundary law");
    if (closed) {
        const BoundaryLaw& law = beta.law();
        const double c = beta.diffusion() * std::pow(law.L0, beta.alpha() - 2.0);
        const double eps = beta.epsilon();
        if (beta.kind() == WeightKind::beta_subcritical)
            return std::log(4.0 * c / eps) + log_expm1(beta.value(T) - beta.value(t0));
        return std::log(c / eps) +
               log_expm1(eps / law.k * (std::log1p(law.k * T) - std::log1p(law.k * t0)));
    }
    const double bT = beta.value(T);
    auto g = [&](double t) { return beta.value(t) - bT + std::log(schedule.p(t)); };
    return log_integral(g, t0, T, beta.law().k) + bT - beta.value(t0);
}

}  // namespace

double log_master_bound_degenerate(double alpha, const CoefficientSchedule& schedule,
                                   const WeightFunction& beta, double norm_u_t0, double t0,
                                   double T, DegenerateIntegral method) {
    require_weak_degeneracy(alpha, kModule);
    if (!(norm_u_t0 >= 0.0)) throw InvalidArgument(kModule, "initial norm must be nonnegative");
    if (!(t0 >= 0.0) || !(T >= t0)) throw InvalidArgument(kModule, "need 0 <= t0 <= T");
    if (t0 < beta.t0() - 1e-12 * (1.0 + beta.t0()))
        throw InvalidArgument(kModule, "t0 precedes the weight's admissibility interval");
    if (T == t0) return kInf;
    if (!is_admissible(beta, schedule, T))
        throw InvalidArgument(kModule, "weight violates the admissibility condition on [t0, T]");
    if (norm_u_t0 == 0.0) return -kInf;
    return std::log(norm_u_t0) -
           0.5 * (std::log1p(-alpha) + log_weighted_integral(schedule, beta, t0, T, method));
}

double master_bound_degenerate(double alpha, const CoefficientSchedule& schedule,
                               const WeightFunction& beta, double norm_u_t0, double t0, double T,
                               DegenerateIntegral method) {
    return std::exp(log_master_bound_degenerate(alpha, schedule, beta, norm_u_t0, t0, T, method));
}

// ---------------------------------------------------------------- specs & reports

std::string to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::nondeg_master: return "nondeg-master";
        case BoundKind::l2_remark: return "l2-remark";
        case BoundKind::exp_regime: return "exp-regime";
        case BoundKind::subexp_regime: return "subexp-regime";
        case BoundKind::poly_critical: return "poly-critical";
        case BoundKind::cauchy_kernel: return "cauchy-kernel";
        case BoundKind::degenerate_master: return "degenerate-master";
    }
    return "?";
}

BoundKind bound_kind_from_string(const std::string& name) {
    for (BoundKind k : {BoundKind::nondeg_master, BoundKind::l2_remark, BoundKind::exp_regime,
                        BoundKind::subexp_regime, BoundKind::poly_critical,
                        BoundKind::cauchy_kernel, BoundKind::degenerate_master})
        if (to_string(k) == name) return k;
    throw InvalidArgument(kModule, "unknown bound kind '" + name + "'");
}

namespace {

bool is_regime(BoundKind k) {
    return k == BoundKind::exp_regime || k == BoundKind::subexp_regime ||
           k == BoundKind::poly_critical || k == BoundKind::cauchy_kernel;
}

void check_regime_kind(const BoundSpec& s) {
    const double g = s.law.gamma;
    const bool ok = (s.kind == BoundKind::exp_regime && g <= 0.0) ||
                    (s.kind == BoundKind::subexp_regime && g > 0.0 && g < 0.5 && !is_half(g)) ||
                    (s.kind == BoundKind::poly_critical && is_half(g)) ||
                    s.kind == BoundKind::cauchy_kernel;
    if (!ok) throw InvalidArgument(kModule, to_string(s.kind) + " does not apply at this gamma");
}

}  // namespace

double BoundSpec::evaluate(double T) const {
    if (!std::isfinite(norm_y0)) throw InvalidArgument(kModule, "bound needs an initial norm");
    switch (kind) {
        case BoundKind::nondeg_master:
            return T <= 0.0 ? kInf : master_bound_nondegenerate(rho, law, norm_y0, T);
        case BoundKind::l2_remark: return l2_bound(rho, law, norm_y0, T);
        case BoundKind::cauchy_kernel:
            if (!std::isfinite(z0_l1)) throw InvalidArgument(kModule, "kernel bound needs |z0|_1");
            return T <= 0.0 ? kInf : heat_kernel_sup_bound(z0_l1, diffusion, T);
        case BoundKind::exp_regime:
        case BoundKind::subexp_regime:
        case BoundKind::poly_critical: {
            check_regime_kind(*this);
            if (T < regime_threshold(rho, law)) return kInf;
            return regime_bound(rho, law, norm_y0, T).value;
        }
        case BoundKind::degenerate_master: {
            if (!beta) throw InvalidArgument(kModule, "degenerate bound needs a weight");
            if (T <= t0) return kInf;
            return master_bound_degenerate(alpha, transformed_coefficients(law, alpha, diffusion),
                                           *beta, norm_y0, t0, T);
        }
    }
    return kInf;
}

double BoundReport::worst_ratio() const {
    double w = 0.0;
    for (const auto& r : records) w = std::max(w, r.ratio);
    return w;
}

BoundReport check_bound(const Trajectory& traj, const BoundSpec& spec_in, double slack) {
    if (!(slack >= 0.0)) throw InvalidArgument(kModule, "slack must be nonnegative");
    if (traj.size() == 0) throw InvalidArgument(kModule, "empty trajectory");
    BoundSpec spec = spec_in;
    BoundReport rep;
    rep.kind = spec.kind;
    rep.slack = slack;

    if (spec.kind == BoundKind::degenerate_master) {
        std::size_t i0 = traj.size();
        for (std::size_t i = 0; i < traj.size(); ++i)
            if (traj.at(i).t >= spec.t0 - 1e-12 * (1.0 + spec.t0)) {
                i0 = i;
                break;
            }
        if (i0 == traj.size()) return rep;
        if (!std::isfinite(spec.norm_y0)) {
            spec.norm_y0 = traj.at(i0).l2_norm;
            spec.t0 = std::max(spec.t0, traj.at(i0).t);
        }
    } else if (!std::isfinite(spec.norm_y0)) {
        spec.norm_y0 = traj.physical_l2(0);
    }
    if (spec.kind == BoundKind::cauchy_kernel && !std::isfinite(spec.z0_l1))
        spec.z0_l1 = comparison_datum_l1(spec.law.L0, traj.at(0).sup_norm);
    double threshold = 0.0;
    if (is_regime(spec.kind) && spec.kind != BoundKind::cauchy_kernel) {
        check_regime_kind(spec);
        threshold = regime_threshold(spec.rho, spec.law);
    }

    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.at(i).t;
        if (!(t > spec.t0) || t < threshold) continue;
        BoundRecord r;
        r.t = t;
        r.norm = spec.kind == BoundKind::l2_remark ? traj.physical_l2(i) : traj.at(i).sup_norm;
        r.bound = spec.evaluate(t);
        r.ratio = r.bound > 0.0 ? r.norm / r.bound : (r.norm > 0.0 ? kInf : 0.0);
        r.satisfied = r.norm <= r.bound * (1.0 + slack);
        if (!r.satisfied) ++rep.violations;
        rep.records.push_back(r);
    }
    return rep;
}

void write_bound_csv(std::ostream& out, const BoundReport& report) {
    out << "t,norm,bound,ratio,satisfied\n";
    for (const auto& r : report.records)
        write_csv_row(out, {format_real(r.t), format_real(r.norm), format_real(r.bound),
                            format_real(r.ratio), r.satisfied ? "1" : "0"});
}

}  // namespace ncdecay
