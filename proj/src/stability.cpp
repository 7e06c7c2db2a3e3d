#include "ncdecay/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "ncdecay/csv.hpp"
#include "ncdecay/error.hpp"
#include "ncdecay/spectral.hpp"

namespace ncdecay {

namespace {

constexpr const char* kModule = "stability";

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

RegimePrediction predict_regime(double alpha, double gamma) {
    require_weak_degeneracy(alpha, kModule);
    if (!std::isfinite(gamma)) throw InvalidArgument(kModule, "gamma must be finite");
    RegimePrediction r;
    r.alpha = alpha;
    r.gamma = gamma;
    const double gc = gamma_critical(alpha);
    r.critical = near(gamma, gc);
    r.supercritical = !r.critical && gamma > gc;
    if (gamma <= 0.0) r.tier = Tier::exponential;
    else if (!r.critical && gamma < gc) r.tier = Tier::subexponential;
    else r.tier = Tier::polynomial;
    return r;
}

// ---------------------------------------------------------------- classifier

namespace {

// OLS of y on (1, f); the slope is reported as the decay rate -b.
FamilyFit fit_line(Tier family, double exponent, std::span<const double> f,
                   std::span<const double> y) {
    const std::size_t n = f.size();
    double mf = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mf += f[i];
        my += y[i];
    }
    mf /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sff = 0.0, sfy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sff += (f[i] - mf) * (f[i] - mf);
        sfy += (f[i] - mf) * (y[i] - my);
    }
    FamilyFit fit;
    fit.family = family;
    fit.exponent = exponent;
    if (!(sff > 0.0)) return fit;
    const double b = sfy / sff;
    fit.rate = -b;
    fit.intercept = my - b * mf;
    if (!(fit.rate > 0.0)) return fit;  // growing or flat: not a decay model
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + b * f[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

}  // namespace

DecayFit classify_decay(std::span<const double> t, std::span<const double> norm,
                        const ClassifierOptions& opt) {
    if (t.size() != norm.size()) throw InvalidArgument(kModule, "series lengths differ");
    if (t.size() < 30) throw InvalidArgument(kModule, "need at least 30 samples");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(norm[i] > 0.0) || !std::isfinite(norm[i]))
            throw InvalidArgument(kModule, "norms must be positive and finite");
        if (i > 0 && !(t[i] > t[i - 1])) throw InvalidArgument(kModule, "times must increase");
    }
    const double t_hi = t.back();
    double t_first = 0.0;
    for (double v : t)
        if (v > 0.0) {
            t_first = v;
            break;
        }
    if (!(t_first > 0.0) || t_hi / t_first < 100.0 * (1.0 - 1e-12))
        throw InvalidArgument(kModule, "series must span at least two decades in t");

    DecayFit out;
    out.t_hi = t_hi;
    out.t_lo = std::max(t_first, t_hi * std::pow(10.0, -opt.window_decades));
    std::vector<double> s, y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < out.t_lo * (1.0 - 1e-12)) continue;
        s.push_back(opt.k > 0.0 ? 1.0 + opt.k * t[i] : t[i]);
        y.push_back(std::log(norm[i]));
    }
    out.samples = s.size();
    if (s.size() < 10) throw InvalidArgument(kModule, "fewer than 10 samples in the fit window");

    std::vector<double> f(s.size());
    auto power_fit = [&](Tier family, double e) {
        for (std::size_t i = 0; i < s.size(); ++i) f[i] = std::pow(s[i], e);
        return fit_line(family, e, f, y);
    };
    FamilyFit best_exp, best_sub, best_poly;
    for (double e : opt.exp_exponents) {
        const FamilyFit c = power_fit(Tier::exponential, e);
        if (c.residual < best_exp.residual) best_exp = c;
    }
    best_exp.family = Tier::exponential;
    const int steps = static_cast<int>(std::lround((opt.sigma_hi - opt.sigma_lo) / opt.sigma_step));
    for (int i = 0; i <= steps; ++i) {
        const double sigma = opt.sigma_lo + opt.sigma_step * i;
        const FamilyFit c = power_fit(Tier::subexponential, sigma);
        if (c.residual < best_sub.residual) best_sub = c;
    }
    best_sub.family = Tier::subexponential;
    for (std::size_t i = 0; i < s.size(); ++i) f[i] = std::log(s[i]);
    best_poly = fit_line(Tier::polynomial, 0.0, f, y);

    out.families = {best_exp, best_sub, best_poly};
    std::array<FamilyFit, 3> ranked = out.families;
    std::sort(ranked.begin(), ranked.end(),
              [](const FamilyFit& a, const FamilyFit& b) { return a.residual < b.residual; });
    const FamilyFit& win = ranked[0];
    out.residual = win.residual;
    const bool decisive = std::isfinite(win.residual) &&
                          (win.residual <= opt.margin * ranked[1].residual);
    if (!decisive) {
        out.tier = Tier::undetermined;
        out.rate = win.rate;
        out.exponent = win.exponent;
        return out;
    }
    out.tier = win.family;
    out.rate = win.rate;
    out.exponent = win.family == Tier::polynomial ? std::numeric_limits<double>::quiet_NaN()
                                                   : win.exponent;
    return out;
}

// ---------------------------------------------------------------- sweep

bool tiers_agree(const RegimePrediction& p, Tier fitted) {
    if (fitted == Tier::undetermined) return false;
    if (p.supercritical) return fitted == Tier::polynomial;
    return fitted == p.tier;
}

SweepCell run_cell(double alpha, double gamma, const SweepRun& run) {
    SweepCell cell;
    cell.alpha = alpha;
    cell.gamma = gamma;
    try {
        cell.prediction = predict_regime(alpha, gamma);
        ProblemSpec spec;
        spec.alpha = alpha;
        spec.diffusion = run.diffusion;
        spec.law = BoundaryLaw::make(run.L0, run.k, gamma);
        spec.initial = run.initial;
        const Grid grid = Grid::for_alpha(run.cells, alpha);
        const auto times = geometric_times(run.k, run.t_max, run.intervals);
        IntegrationOptions io = run.integration;
        io.theta = run.theta;
        const Trajectory traj = solve_moving(spec, grid, times, io);
        std::vector<double> ts, ns;
        for (const auto& s : traj.snapshots()) {
            if (!(s.sup_norm > 0.0)) break;
            ts.push_back(s.t);
            ns.push_back(s.sup_norm);
        }
        ClassifierOptions co = run.classifier;
        co.k = run.k;
        cell.fit = classify_decay(ts, ns, co);
        cell.agree = tiers_agree(cell.prediction, cell.fit->tier);
    } catch (const Error& e) {
        cell.error = e.what();
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

std::vector<SweepCell> regime_sweep(std::span<const double> alphas, std::span<const double> gammas,
                                    const SweepRun& run) {
    const std::size_t total = alphas.size() * gammas.size();
    std::vector<SweepCell> cells(total);
    if (total == 0) return cells;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++)
            cells[i] = run_cell(alphas[i / gammas.size()], gammas[i % gammas.size()], run);
    };
    const std::size_t n = std::clamp<std::size_t>(run.threads, 1, total);
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    return cells;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells) {
    out << "alpha,gamma,predicted_tier,fitted_tier,rate,exponent,residual,agree\n";
    for (const auto& c : cells) {
        const bool has = c.fit.has_value();
        write_csv_row(out, {format_real(c.alpha), format_real(c.gamma), to_string(c.prediction.tier),
                            has ? to_string(c.fit->tier) : "error",
                            has ? format_real(c.fit->rate) : "nan",
                            has ? format_real(c.fit->exponent) : "nan",
                            has ? format_real(c.fit->residual) : "nan", c.agree ? "1" : "0"});
    }
}

// ---------------------------------------------------------------- floor

double ComparisonFloor::operator()(double t) const {
    if (!(t >= 0.0)) throw InvalidArgument(kModule, "time must be nonnegative");
    return norm0 * std::exp(-power * std::log1p(k * t));
}

ComparisonFloor comparison_floor(double alpha, const BoundaryLaw& law, int n, double diffusion,
                                 std::size_t cells) {
    require_weak_degeneracy(alpha, kModule);
    if (!(law.gamma > gamma_critical(alpha)) || near(law.gamma, gamma_critical(alpha)))
        throw InvalidArgument(kModule, "comparison floor needs gamma above the critical exponent");
    if (n < 1) throw InvalidArgument(kModule, "eigen index must be >= 1");
    ComparisonFloor f;
    f.k = law.k;
    f.index = n;
    if (alpha == 0.0) {
        const auto prob = EigenProblem::selfsimilar(diffusion, law.k, law.L0);
        const auto pairs = solve_eigen(prob, Grid::uniform(cells), n);
        const auto& e = pairs.back();
        f.eigenvalue = e.eigenvalue;
        f.power = prob.decay_power(e.eigenvalue);
        f.norm0 = e.sup_norm;
        f.eigenfunction = e.values;
    } else {
        const auto prob = EigenProblem::degenerate_critical(alpha, law.k, law.L0, diffusion);
        const auto pairs = solve_eigen(prob, Grid::for_alpha(cells, alpha), n);
        const auto& e = pairs.back();
        f.eigenvalue = e.eigenvalue;
        f.power = prob.decay_power(e.eigenvalue);
        f.norm0 = e.l2_norm;
        f.eigenfunction = e.values;
    }
    return f;
}

}  // namespace ncdecay
