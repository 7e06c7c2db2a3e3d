#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "ncdecay/harness.hpp"
#include "ncdecay/oracles.hpp"
#include "ncdecay/spectral.hpp"

namespace ncdecay::harness {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& r, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(r); }
int pick(Rng& r, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(r); }
double log_uniform(Rng& r, double lo, double hi) { return std::exp(uniform(r, std::log(lo), std::log(hi))); }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Random admissible spec plus grid for the discrete-principle suites.
struct RandomCase {
    ProblemSpec spec;
    Grid grid = Grid::uniform(8);
};

RandomCase random_case(Rng& r) {
    RandomCase c;
    auto& s = c.spec;
    s.alpha = pick(r, 0, 3) == 0 ? 0.0 : uniform(r, 0.0, 0.95);
    s.diffusion = log_uniform(r, 0.1, 5.0);
    s.law = BoundaryLaw::make(log_uniform(r, 0.2, 3.0), log_uniform(r, 0.05, 5.0), uniform(r, -2.0, 3.0));
    if (s.alpha > 0.0 && pick(r, 0, 3) == 0) s.regularization_level = pick(r, 1, 1000);
    const auto n = static_cast<std::size_t>(pick(r, 8, 200));
    c.grid = pick(r, 0, 1) ? Grid::uniform(n) : Grid::graded(n, uniform(r, 1.0, 3.0));
    return c;
}

std::vector<double> random_state(Rng& r, const Grid& g, double lo, double hi) {
    std::vector<double> u(g.size());
    for (std::size_t i = 1; i + 1 < g.size(); ++i) u[i] = uniform(r, lo, hi);
    return u;
}

double max_of(const std::vector<double>& u) { return *std::max_element(u.begin(), u.end()); }
double min_of(const std::vector<double>& u) { return *std::min_element(u.begin(), u.end()); }

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"max-principle", "comparison",   "hardy",
                                                "energy-monotonicity", "eigen-oracle", "bound-dominance"};
    return names;
}

SuiteResult verify_max_principle(std::uint64_t seed, std::size_t runs) {
    SuiteResult res;
    res.name = "max-principle";
    res.worst = -std::numeric_limits<double>::infinity();
    Rng rng(derive_seed(seed, "max-principle"));
    constexpr double tol = 1e-12;
    for (std::size_t run = 0; run < runs; ++run) {
        auto c = random_case(rng);
        auto u = random_state(rng, c.grid, -1.0, 1.0);
        double t = 0.0;
        bool bad = false;
        for (int n = 0; n < 30; ++n) {
            const double dt = log_uniform(rng, 1e-4, 10.0);
            auto next = step(c.spec, c.grid, u, t, dt, 1.0, DriftScheme::upwind);
            // |u| and the one-sided extrema (against the zero boundary data).
            const double grow = std::max({sup_norm(next) - sup_norm(u), max_of(next) - std::max(max_of(u), 0.0),
                                          std::min(min_of(u), 0.0) - min_of(next)});
            res.worst = std::max(res.worst, grow);
            if (grow > tol) bad = true;
            u = std::move(next);
            t += dt;
        }
        ++res.trials;
        if (bad) ++res.failures;
    }
    res.detail = fmt("largest extremum increase %.3e (tolerance 1e-12)", res.worst);
    return res;
}

SuiteResult verify_comparison(std::uint64_t seed, std::size_t runs) {
    SuiteResult res;
    res.name = "comparison";
    res.worst = -std::numeric_limits<double>::infinity();
    Rng rng(derive_seed(seed, "comparison"));
    constexpr double tol = 1e-12;
    for (std::size_t run = 0; run < runs; ++run) {
        auto c = random_case(rng);
        auto v = random_state(rng, c.grid, -1.0, 1.0);
        auto w = v;
        for (std::size_t i = 1; i + 1 < w.size(); ++i)
            w[i] += pick(rng, 0, 2) == 0 ? 0.0 : uniform(rng, 0.0, 1.0);
        double t = 0.0;
        bool bad = false;
        for (int n = 0; n < 30; ++n) {
            const double dt = log_uniform(rng, 1e-4, 10.0);
            v = step(c.spec, c.grid, v, t, dt, 1.0, DriftScheme::upwind);
            w = step(c.spec, c.grid, w, t, dt, 1.0, DriftScheme::upwind);
            for (std::size_t i = 0; i < v.size(); ++i) {
                res.worst = std::max(res.worst, v[i] - w[i]);
                if (v[i] > w[i] + tol) bad = true;
            }
            t += dt;
        }
        ++res.trials;
        if (bad) ++res.failures;
    }
    res.detail = fmt("largest order violation %.3e (tolerance 1e-12)", res.worst);
    return res;
}

HardySums discrete_hardy(const Grid& g, std::span<const double> u, double alpha) {
    HardySums s;
    // The x^{alpha-2} sum is an improper integral; for alpha > 1/2 the first
    // interior node's cell is left out so the quadrature stays bounded.
    const std::size_t first = alpha > 0.5 ? 2 : 1;
    for (std::size_t i = first; i < g.size(); ++i)
        s.lhs += std::pow(g.node(i), alpha - 2.0) * u[i] * u[i] * g.control_width(i);
    double grad = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double d = (u[i + 1] - u[i]) / g.edge(i);
        grad += std::pow(g.face(i), alpha) * d * d * g.edge(i);
    }
    s.rhs = 4.0 / ((1.0 - alpha) * (1.0 - alpha)) * grad;
    return s;
}

std::vector<double> random_hardy_function(std::uint64_t seed, const Grid& g, double alpha) {
    Rng r(seed);
    std::vector<double> u(g.size());
    const int kind = pick(r, 0, 2);
    if (kind == 0) {
        double c[8];
        for (double& ci : c) ci = uniform(r, -1.0, 1.0);
        for (std::size_t i = 0; i < g.size(); ++i)
            for (int m = 0; m < 8; ++m) u[i] += c[m] * std::sin((m + 1) * std::numbers::pi * g.node(i)) / (m + 1);
    } else if (kind == 1) {
        // Near the extremal power x^{(1-alpha)/2}.
        const double s = 0.5 * (1.0 - alpha) + log_uniform(r, 0.005, 2.5);
        const double q = pick(r, 0, 2) == 0 ? 0.0 : uniform(r, 0.5, 2.0);
        for (std::size_t i = 0; i < g.size(); ++i)
            u[i] = std::pow(g.node(i), s) * std::pow(1.0 - g.node(i), q);
    } else {
        // Piecewise linear through random knots, zero at 0.
        const int knots = pick(r, 3, 12);
        std::vector<double> kx(knots + 1), ky(knots + 1);
        for (int j = 0; j <= knots; ++j) {
            kx[j] = std::pow(static_cast<double>(j) / knots, uniform(r, 1.0, 2.0));
            ky[j] = j == 0 ? 0.0 : uniform(r, -1.0, 1.0);
        }
        kx.back() = 1.0;
        std::sort(kx.begin(), kx.end());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.node(i);
            auto it = std::upper_bound(kx.begin(), kx.end(), x);
            const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - kx.begin()), kx.size() - 1);
            const double span = kx[j] - kx[j - 1];
            const double w = span > 0 ? (x - kx[j - 1]) / span : 1.0;
            u[i] = (1 - w) * ky[j - 1] + w * ky[j];
        }
    }
    u[0] = 0.0;
    return u;
}

SuiteResult verify_hardy(std::uint64_t seed, std::size_t per_alpha) {
    SuiteResult res;
    res.name = "hardy";
    const Grid g = Grid::uniform(2000);
    constexpr double slack = 0.02;
    for (double alpha : {0.0, 0.25, 0.5, 0.75}) {
        Rng rng(derive_seed(seed, "hardy:" + std::to_string(alpha)));
        for (std::size_t trial = 0; trial < per_alpha; ++trial) {
            const auto u = random_hardy_function(rng(), g, alpha);
            const auto s = discrete_hardy(g, u, alpha);
            const double ratio = s.lhs / s.rhs;
            res.worst = std::max(res.worst, ratio);
            ++res.trials;
            if (!(s.lhs <= s.rhs * (1.0 + slack))) ++res.failures;
        }
    }
    res.detail = fmt("worst lhs/rhs %.6f (allowed %.2f)", res.worst, 1.0 + slack);
    return res;
}

SuiteResult verify_energy_monotonicity(std::uint64_t seed, std::size_t runs) {
    SuiteResult res;
    res.name = "energy-monotonicity";
    res.worst = -std::numeric_limits<double>::infinity();
    Rng rng(derive_seed(seed, "energy"));
    double worst_m2 = 0.0;
    std::ostringstream fails;
    for (std::size_t run = 0; run < runs; ++run) {
        ProblemSpec spec;
        spec.alpha = 0.0;
        spec.diffusion = log_uniform(rng, 0.2, 3.0);
        spec.law = BoundaryLaw::make(log_uniform(rng, 0.5, 2.0), log_uniform(rng, 0.1, 3.0), uniform(rng, -1.0, 2.0));
        const int m = pick(rng, 1, 4);
        spec.initial = pick(rng, 0, 1) ? InitialDatum::sine(m) : InitialDatum::bump(uniform(rng, 0.3, 0.7), 0.2);
        const double rho = spec.diffusion * uniform(rng, 0.1, 1.0);
        const Grid grid = Grid::uniform(static_cast<std::size_t>(pick(rng, 64, 256)));
        IntegrationOptions io;
        io.scheme = TimeScheme::fractional_theta;
        const auto times = geometric_times(spec.law.k, 20.0, 200);
        const Trajectory tr = solve_moving(spec, grid, times, io);
        const double h = 1.0 / static_cast<double>(grid.cells());
        bool bad = false;
        double prev = 0.0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const auto& snap = tr.at(i);
            if (!(snap.sup_norm > 0.0)) break;
            // Logarithms: the norms leave the normal range long before t_max.
            const double log_e = rho * alpha_weight(spec.law, snap.t) + 2.0 * std::log(tr.physical_l2(i));
            if (i > 0) {
                const double dt = snap.t - tr.at(i - 1).t;
                const double growth = std::expm1(log_e - prev);
                res.worst = std::max(res.worst, growth);
                if (growth > h * h + dt * 1e-3) {
                    if (!bad) fails << "run " << run << ": energy grew by " << growth << " at t=" << snap.t << "; ";
                    bad = true;
                }
            }
            prev = log_e;
            // M(t)^2 <= l ∫ y_xi^2 = ∫ u_x^2 on the reference interval.
            std::vector<double> scaled(snap.values);
            for (double& v : scaled) v /= snap.sup_norm;
            const double r = 1.0 / std::sqrt(dirichlet_energy(grid, scaled));
            worst_m2 = std::max(worst_m2, r * r);
            if (!(r * r <= 1.0 + 1e-12)) {
                if (!bad) fails << "run " << run << ": M^2 ratio " << r * r << " at t=" << snap.t << "; ";
                bad = true;
            }
        }
        ++res.trials;
        if (bad) ++res.failures;
    }
    res.detail = fails.str() + fmt("largest relative energy increase %.3e; worst M^2/(l|y_x|^2) %.6f", res.worst, worst_m2);
    return res;
}

SuiteResult verify_eigen_oracle(std::size_t cells) {
    SuiteResult res;
    res.name = "eigen-oracle";
    std::ostringstream detail;
    double worst_gram = 0.0, worst_var = 0.0;
    auto check = [&](const EigenProblem& problem, const oracle::SturmLiouville& sl, const Grid& grid,
                     const std::string& name) {
        const auto pairs = solve_eigen(problem, grid, 3);
        const double x_start = problem.alpha() > 0.0 ? 1e-3 / static_cast<double>(cells) : 0.0;
        for (int n = 1; n <= 3; ++n) {
            const double ref = oracle::shooting_eigenvalue(sl, n, x_start);
            const double rel = std::abs(pairs[n - 1].eigenvalue / ref - 1.0);
            res.worst = std::max(res.worst, rel);
            ++res.trials;
            if (!(rel <= 1e-6)) {
                ++res.failures;
                detail << name << " n=" << n << " rel " << rel << "; ";
            }
        }
        const Pencil pen = assemble_pencil(problem, grid);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double g = inner_K(pen, pairs[i].values, pairs[j].values) - (i == j ? 1.0 : 0.0);
                worst_gram = std::max(worst_gram, std::abs(g));
            }
        ++res.trials;
        if (!(worst_gram <= 1e-10)) {
            ++res.failures;
            detail << name << " gram " << worst_gram << "; ";
        }
        // Upper bound from the Ritz minimisation: the dense value must sit below it.
        const auto var = oracle::variational_minimum(sl);
        const double rel = (var.value - pairs[0].eigenvalue) / pairs[0].eigenvalue;
        worst_var = std::max(worst_var, std::abs(rel));
        ++res.trials;
        if (!(std::abs(rel) <= 1e-4)) {
            ++res.failures;
            detail << name << " variational " << rel << "; ";
        }
    };
    check(EigenProblem::selfsimilar(1, 1, 1), oracle::selfsimilar_problem(1, 1, 1), Grid::uniform(cells), "selfsimilar");
    for (double alpha : {0.25, 0.5, 0.75})
        check(EigenProblem::degenerate_critical(alpha, 1, 1), oracle::critical_problem(alpha, 1, 1),
              Grid::for_alpha(cells, alpha), "critical alpha=" + fmt("%.2f", alpha));
    detail << fmt("worst eigenvalue rel %.3e, gram %.3e, variational %.3e", res.worst, worst_gram, worst_var);
    res.detail = detail.str();
    return res;
}

std::vector<BoundDominanceCase> bound_dominance_cases(std::uint64_t seed, std::size_t per_bound) {
    std::vector<BoundDominanceCase> cases;
    Rng rng(derive_seed(seed, "bound-dominance"));
    for (std::size_t i = 0; i < per_bound; ++i) {
        BoundDominanceCase c;
        c.kind = BoundKind::nondeg_master;
        c.spec.alpha = 0.0;
        c.spec.diffusion = log_uniform(rng, 0.2, 3.0);
        c.spec.law = BoundaryLaw::make(log_uniform(rng, 0.5, 2.0), log_uniform(rng, 0.1, 3.0), uniform(rng, -1.0, 2.0));
        c.rho = c.spec.diffusion * uniform(rng, 0.05, 1.0);
        c.spec.initial = pick(rng, 0, 1) ? InitialDatum::sine(pick(rng, 1, 3))
                                         : InitialDatum::bump(uniform(rng, 0.3, 0.7), uniform(rng, 0.1, 0.3));
        cases.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < per_bound;) {
        BoundDominanceCase c;
        c.kind = BoundKind::degenerate_master;
        const double alpha = uniform(rng, 0.05, 0.9);
        const double gc = gamma_critical(alpha);
        const bool critical = pick(rng, 0, 3) == 0;
        const double gamma = critical ? gc : uniform(rng, -1.0, gc - 0.02);
        c.spec.alpha = alpha;
        c.spec.diffusion = log_uniform(rng, 0.2, 3.0);
        c.spec.law = BoundaryLaw::make(log_uniform(rng, 0.5, 2.0), log_uniform(rng, 0.1, 3.0), gamma);
        c.spec.initial = pick(rng, 0, 1) ? InitialDatum::sine(pick(rng, 1, 3))
                                         : InitialDatum::bump(uniform(rng, 0.3, 0.7), uniform(rng, 0.1, 0.3));
        try {
            if (critical) {
                c.beta = beta_critical(alpha, c.spec.law,
                                       beta_critical_epsilon_cap(alpha, c.spec.law, c.spec.diffusion), c.spec.diffusion);
            } else {
                const auto e = admissible_epsilon(alpha, c.spec.law, c.spec.diffusion);
                if (e.t0 > 25.0) continue;  // keep half the horizon past t0
                c.beta = beta_subcritical(alpha, c.spec.law, e.epsilon, e.t0, c.spec.diffusion);
            }
        } catch (const NumericalFailure&) {
            continue;
        }
        cases.push_back(std::move(c));
        ++i;
    }
    return cases;
}

BoundReport run_bound_case(const BoundDominanceCase& c, double t_max) {
    const Grid grid = Grid::for_alpha(200, c.spec.alpha);
    IntegrationOptions io;
    io.scheme = TimeScheme::fractional_theta;
    const auto times = geometric_times(c.spec.law.k, t_max, 100);
    const Trajectory tr = solve_moving(c.spec, grid, times, io);
    BoundSpec b;
    b.kind = c.kind;
    b.rho = c.rho;
    b.law = c.spec.law;
    b.alpha = c.spec.alpha;
    b.diffusion = c.spec.diffusion;
    if (c.beta) {
        b.beta = c.beta;
        b.t0 = c.beta->t0();
    }
    return check_bound(tr, b, 0.05);
}

SuiteResult verify_bound_dominance(std::uint64_t seed, std::size_t per_bound, double t_max, std::size_t threads) {
    SuiteResult res;
    res.name = "bound-dominance";
    const auto cases = bound_dominance_cases(seed, per_bound);
    std::vector<BoundReport> reports(cases.size());
    std::vector<std::string> errors(cases.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < cases.size();) {
            try {
                reports[i] = run_bound_case(cases[i], t_max);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < std::clamp<std::size_t>(threads, 1, cases.size()); ++w) pool.emplace_back(worker);
        worker();
    }
    std::ostringstream detail;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        ++res.trials;
        if (!errors[i].empty()) {
            ++res.failures;
            detail << "case " << i << ": " << errors[i] << "; ";
            continue;
        }
        res.worst = std::max(res.worst, reports[i].worst_ratio());
        if (!reports[i].ok() || reports[i].records.empty()) {
            ++res.failures;
            detail << "case " << i << " (" << to_string(cases[i].kind) << "): " << reports[i].violations
                   << " violations; ";
        }
    }
    detail << fmt("worst norm/bound %.4f (slack 5%%)", res.worst);
    res.detail = detail.str();
    return res;
}

std::vector<SuiteResult> run_verify(std::string_view selector, std::uint64_t seed, std::size_t threads) {
    const auto& names = suite_names();
    if (selector != "all" && std::find(names.begin(), names.end(), selector) == names.end()) {
        std::string list = "all";
        for (const auto& n : names) list += ", " + n;
        throw UsageError("unknown suite '" + std::string(selector) + "'; valid suites: " + list);
    }
    std::vector<SuiteResult> out;
    auto want = [&](std::string_view n) { return selector == "all" || selector == n; };
    if (want("max-principle")) out.push_back(verify_max_principle(seed));
    if (want("comparison")) out.push_back(verify_comparison(seed));
    if (want("hardy")) out.push_back(verify_hardy(seed));
    if (want("energy-monotonicity")) out.push_back(verify_energy_monotonicity(seed));
    if (want("eigen-oracle")) out.push_back(verify_eigen_oracle());
    if (want("bound-dominance")) out.push_back(verify_bound_dominance(seed, 20, 50.0, threads));
    return out;
}

}  // namespace ncdecay::harness
