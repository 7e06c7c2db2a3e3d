#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ncdecay/csv.hpp"
#include "ncdecay/harness.hpp"
#include "ncdecay/spectral.hpp"
#include "svg.hpp"

namespace ncdecay::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int selector_index(const std::string& initial, std::string_view prefix) {
    return std::stoi(initial.substr(prefix.size()));
}

EigenProblem eigen_problem(const ExperimentConfig& c) {
    const auto& p = c.problem;
    std::string kind = c.analysis.eigen_kind;
    if (kind == "auto") kind = p.alpha == 0.0 ? "selfsimilar" : "degenerate-critical";
    if (kind == "selfsimilar") {
        if (p.alpha != 0.0) throw ConfigError("analysis.eigen_kind", "selfsimilar requires alpha = 0");
        return EigenProblem::selfsimilar(p.a, p.k, p.L0);
    }
    return EigenProblem::degenerate_critical(p.alpha, p.k, p.L0, p.a);
}

InitialDatum read_datum_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("problem.initial", "cannot read " + path.string());
    std::vector<double> xs, ys;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x, y;
        if (!(ls >> x >> y)) {
            if (xs.empty()) continue;  // header row
            throw ConfigError("problem.initial",
                              path.string() + ":" + std::to_string(lineno) + ": expected 'x,value'");
        }
        if (!xs.empty() && !(x > xs.back()))
            throw ConfigError("problem.initial", path.string() + ": x must be increasing");
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.size() < 2 || xs.front() != 0.0 || xs.back() != 1.0)
        throw ConfigError("problem.initial", path.string() + ": samples must span [0, 1]");
    return InitialDatum::reference([xs, ys](double x) {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.begin()) return ys.front();
        if (it == xs.end()) return ys.back();
        const std::size_t j = static_cast<std::size_t>(it - xs.begin());
        const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return (1 - w) * ys[j - 1] + w * ys[j];
    });
}

void write_file(const fs::path& path, const std::string& text, std::vector<std::string>* artifacts) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("harness", "cannot write " + path.string());
    if (artifacts) artifacts->push_back(path.filename().string());
}

template <class F>
void write_with(const fs::path& path, F&& f, std::vector<std::string>* artifacts) {
    std::ostringstream o;
    f(o);
    write_file(path, o.str(), artifacts);
}

std::string attribute(const std::exception& e) {
    if (dynamic_cast<const Error*>(&e)) return e.what();
    return std::string("harness: ") + e.what();
}

double rho_of(const ExperimentConfig& c) {
    return std::isfinite(c.analysis.rho) ? c.analysis.rho : c.problem.a;
}

json fit_json(const std::optional<DecayFit>& fit) {
    if (!fit) return nullptr;
    json j{{"tier", to_string(fit->tier)},   {"rate", fit->rate},
           {"exponent", fit->exponent},      {"t_lo", fit->t_lo},
           {"t_hi", fit->t_hi},              {"residual", fit->residual},
           {"samples", fit->samples}};
    json fam = json::array();
    for (const auto& f : fit->families)
        fam.push_back({{"family", to_string(f.family)},
                       {"exponent", f.exponent},
                       {"rate", f.rate},
                       {"intercept", f.intercept},
                       {"residual", std::isfinite(f.residual) ? json(f.residual) : json(nullptr)}});
    j["families"] = fam;
    return j;
}

}  // namespace

ProblemSpec build_problem(const ExperimentConfig& c) {
    ProblemSpec spec;
    spec.alpha = c.problem.alpha;
    spec.diffusion = c.problem.a;
    spec.law = BoundaryLaw::make(c.problem.L0, c.problem.k, c.problem.gamma);
    spec.regularization_level = c.numerics.regularization;
    const std::string& init = c.problem.initial;
    if (init == "sine") {
        spec.initial = InitialDatum::sine();
    } else if (init.starts_with("sine:")) {
        spec.initial = InitialDatum::sine(selector_index(init, "sine:"));
    } else if (init == "bump") {
        spec.initial = InitialDatum::bump();
    } else if (init.starts_with("eigen:")) {
        const int n = selector_index(init, "eigen:");
        const Grid grid = build_grid(c);
        const auto pairs = solve_eigen(eigen_problem(c), grid, n);
        spec.initial = InitialDatum::samples(grid, pairs.at(static_cast<std::size_t>(n - 1)).values);
    } else if (init.starts_with("file:")) {
        fs::path p = init.substr(5);
        if (p.is_relative()) p = c.base_dir / p;
        spec.initial = read_datum_file(p);
    } else {
        throw ConfigError("problem.initial", "unknown selector '" + init + "'");
    }
    spec.validate();
    return spec;
}

Grid build_grid(const ExperimentConfig& c) {
    if (c.numerics.grading) return Grid::graded(c.numerics.cells, *c.numerics.grading);
    return Grid::for_alpha(c.numerics.cells, c.problem.alpha);
}

std::vector<double> build_times(const ExperimentConfig& c) {
    const auto M = c.numerics.intervals;
    if (c.numerics.time_grid == "geometric") return geometric_times(c.problem.k, c.numerics.t_max, M);
    std::vector<double> t(M + 1);
    for (std::size_t j = 0; j <= M; ++j) t[j] = c.numerics.t_max * static_cast<double>(j) / static_cast<double>(M);
    return t;
}

IntegrationOptions build_integration(const ExperimentConfig& c) {
    IntegrationOptions io;
    io.scheme = c.numerics.scheme == "theta" ? TimeScheme::theta : TimeScheme::fractional_theta;
    io.theta = c.numerics.theta;
    io.drift = c.numerics.drift == "upwind" ? DriftScheme::upwind : DriftScheme::hybrid;
    io.max_log_decrement = c.numerics.max_log_decrement;
    return io;
}

std::vector<BoundSpec> build_bounds(const ExperimentConfig& c, const Trajectory*) {
    const auto& p = c.problem;
    const BoundaryLaw law = BoundaryLaw::make(p.L0, p.k, p.gamma);
    const double gc = gamma_critical(p.alpha);
    const bool at_critical = std::abs(p.gamma - gc) <= 1e-12;

    auto make = [&](BoundKind kind) {
        BoundSpec b;
        b.kind = kind;
        b.rho = rho_of(c);
        b.law = law;
        b.alpha = p.alpha;
        b.diffusion = p.a;
        if (kind == BoundKind::degenerate_master) {
            if (p.alpha == 0.0)
                throw ConfigError("analysis.bounds", "degenerate-master requires alpha > 0");
            if (at_critical) {
                b.beta = beta_critical(p.alpha, law, beta_critical_epsilon_cap(p.alpha, law, p.a), p.a);
            } else if (p.gamma < gc) {
                const auto e = admissible_epsilon(p.alpha, law, p.a);
                b.beta = beta_subcritical(p.alpha, law, e.epsilon, e.t0, p.a);
            } else {
                throw ConfigError("analysis.bounds", "degenerate-master needs gamma <= 1/(2-alpha)");
            }
            b.t0 = b.beta->t0();
        } else if (p.alpha != 0.0) {
            throw ConfigError("analysis.bounds", to_string(kind) + " requires alpha = 0");
        }
        return b;
    };

    std::vector<BoundSpec> out;
    for (const auto& name : c.analysis.bounds) {
        if (name != "auto") {
            out.push_back(make(bound_kind_from_string(name)));
            continue;
        }
        if (p.alpha == 0.0) {
            out.push_back(make(BoundKind::nondeg_master));
            out.push_back(make(BoundKind::l2_remark));
            if (p.gamma <= 0.0) out.push_back(make(BoundKind::exp_regime));
            else if (p.gamma < 0.5) out.push_back(make(BoundKind::subexp_regime));
            else if (p.gamma == 0.5) out.push_back(make(BoundKind::poly_critical));
            else out.push_back(make(BoundKind::cauchy_kernel));
        } else if (p.gamma <= gc + 1e-12) {
            out.push_back(make(BoundKind::degenerate_master));
        }
    }
    return out;
}

fs::path run_directory(const ExperimentConfig& c, std::string_view command,
                       const std::optional<fs::path>& out) {
    if (out) return *out;
    fs::path base = c.output.directory;
    if (base.is_relative()) base = c.base_dir / base;
    return base / (std::string(command) + "-" + config_hash(c).substr(0, 12));
}

RunReport run_solve(const ExperimentConfig& c, const fs::path& dir) {
    const auto start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.command = "solve";
    rep.config_hash = config_hash(c);
    rep.directory = dir;
    fs::create_directories(dir);
    write_file(dir / "config.toml", canonical_text(c), &rep.artifacts);
    rep.prediction = predict_regime(c.problem.alpha, c.problem.gamma);

    const Grid grid = build_grid(c);
    std::optional<Trajectory> traj;
    try {
        const ProblemSpec spec = build_problem(c);
        traj = solve_moving(spec, grid, build_times(c), build_integration(c));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        rep.errors.push_back(attribute(e));
    }

    write_with(dir / "trajectory.csv", [&](std::ostream& o) {
        if (traj) write_trajectory_csv(o, *traj);
        else o << "t,l_t,sup_norm,l2_norm,weighted_l2\n";
    }, &rep.artifacts);

    std::vector<BoundSpec> specs;
    try {
        specs = build_bounds(c, traj ? &*traj : nullptr);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        rep.errors.push_back(attribute(e));
    }
    if (traj) {
        for (const auto& s : specs) {
            try {
                rep.bounds.push_back(check_bound(*traj, s, c.analysis.slack));
            } catch (const std::exception& e) {
                rep.errors.push_back(attribute(e));
            }
        }
    }
    // bounds.csv carries the primary bound; each bound also gets its own file.
    write_with(dir / "bounds.csv", [&](std::ostream& o) {
        if (!rep.bounds.empty()) write_bound_csv(o, rep.bounds.front());
        else o << "t,norm,bound,ratio,satisfied\n";
    }, &rep.artifacts);
    if (c.wants("csv"))
        for (const auto& b : rep.bounds)
            write_with(dir / ("bounds-" + to_string(b.kind) + ".csv"),
                       [&](std::ostream& o) { write_bound_csv(o, b); }, &rep.artifacts);

    std::vector<double> ts, ns;
    if (traj) {
        rep.trajectory.cells = grid.cells();
        rep.trajectory.snapshots = traj->size();
        rep.trajectory.truncated = traj->truncated();
        if (traj->size() > 0) {
            const auto& first = traj->at(0);
            const auto& last = traj->at(traj->size() - 1);
            rep.trajectory.t_end = last.t;
            rep.trajectory.sup_initial = first.sup_norm;
            rep.trajectory.sup_final = last.sup_norm;
            rep.trajectory.l2_initial = traj->physical_l2(0);
            rep.trajectory.l2_final = traj->physical_l2(traj->size() - 1);
        }
        // Same series as a sweep cell: sup norms up to the first zero.
        for (const auto& s : traj->snapshots()) {
            if (!(s.sup_norm > 0.0)) break;
            ts.push_back(s.t);
            ns.push_back(s.sup_norm);
        }
        if (c.analysis.classify) {
            try {
                ClassifierOptions co;
                co.k = c.problem.k;
                co.window_decades = c.analysis.window_decades;
                rep.fit = classify_decay(ts, ns, co);
                rep.agree = tiers_agree(rep.prediction, rep.fit->tier);
            } catch (const std::exception& e) {
                rep.errors.push_back(attribute(e));
            }
        }
    }

    json fit = fit_json(rep.fit);
    json fj{{"fit", fit},
            {"predicted_tier", to_string(rep.prediction.tier)},
            {"critical", rep.prediction.critical},
            {"supercritical", rep.prediction.supercritical},
            {"agree", rep.agree}};
    write_file(dir / "fit.json", fj.dump(2) + "\n", &rep.artifacts);

    if (c.wants("svg") && !ts.empty()) {
        std::vector<PlotSeries> series{{"sup |u|", ts, ns}};
        std::vector<double> tp, l2;
        for (std::size_t i = 0; traj && i < traj->size(); ++i) {
            tp.push_back(traj->at(i).t);
            l2.push_back(traj->physical_l2(i));
        }
        series.push_back({"|y|_2", tp, l2});
        for (const auto& b : rep.bounds) {
            PlotSeries s{to_string(b.kind), {}, {}};
            for (const auto& r : b.records) {
                s.x.push_back(r.t);
                s.y.push_back(r.bound);
            }
            series.push_back(std::move(s));
        }
        // Shift t by 1/k so the log axis keeps t = 0.
        for (auto& s : series)
            for (auto& x : s.x) x += 1.0 / c.problem.k;
        write_file(dir / "norms.svg",
                   svg_plot("alpha=" + format_real(c.problem.alpha) + " gamma=" + format_real(c.problem.gamma),
                            "t + 1/k", "norm", series, true, true),
                   &rep.artifacts);
    }

    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.wants("json")) {
        json bj = json::array();
        for (const auto& b : rep.bounds)
            bj.push_back({{"kind", to_string(b.kind)},
                          {"records", b.records.size()},
                          {"violations", b.violations},
                          {"worst_ratio", b.worst_ratio()}});
        rep.artifacts.push_back("report.json");
        json r{{"command", rep.command},
               {"config_hash", rep.config_hash},
               {"trajectory",
                {{"cells", rep.trajectory.cells},
                 {"snapshots", rep.trajectory.snapshots},
                 {"t_end", rep.trajectory.t_end},
                 {"truncated", rep.trajectory.truncated},
                 {"sup_initial", rep.trajectory.sup_initial},
                 {"sup_final", rep.trajectory.sup_final},
                 {"l2_initial", rep.trajectory.l2_initial},
                 {"l2_final", rep.trajectory.l2_final}}},
               {"bounds", bj},
               {"fit", fit},
               {"predicted_tier", to_string(rep.prediction.tier)},
               {"agree", rep.agree},
               {"errors", rep.errors},
               {"artifacts", rep.artifacts},
               {"wall_seconds", rep.wall_seconds}};
        write_file(dir / "report.json", r.dump(2) + "\n", nullptr);
    }
    return rep;
}

SweepSummary run_sweep(const ExperimentConfig& c, const fs::path& dir) {
    if (c.analysis.sweep_alpha.empty() || c.analysis.sweep_gamma.empty())
        throw ConfigError("analysis.sweep_alpha", "sweep lists must be nonempty");
    if (c.problem.initial.starts_with("eigen:"))
        throw ConfigError("problem.initial", "eigen data depend on (alpha, gamma); not usable in a sweep");
    fs::create_directories(dir);
    write_file(dir / "config.toml", canonical_text(c), nullptr);

    SweepRun run;
    run.cells = c.numerics.cells;
    run.intervals = c.numerics.intervals;
    run.t_max = c.numerics.t_max;
    run.theta = c.numerics.theta;
    run.diffusion = c.problem.a;
    run.L0 = c.problem.L0;
    run.k = c.problem.k;
    run.initial = build_problem(c).initial;
    run.integration = build_integration(c);
    run.classifier.window_decades = c.analysis.window_decades;
    run.threads = c.threads;

    SweepSummary sum;
    sum.directory = dir;
    sum.cells = regime_sweep(c.analysis.sweep_alpha, c.analysis.sweep_gamma, run);
    for (const auto& cell : sum.cells) sum.agreed += cell.agree ? 1 : 0;
    sum.threshold = c.analysis.agreement_threshold;
    sum.passed = !sum.cells.empty() &&
                 static_cast<double>(sum.agreed) >= sum.threshold * static_cast<double>(sum.cells.size()) - 1e-12;

    write_with(dir / "sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, sum.cells); }, nullptr);
    std::ostringstream t;
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %-8s %-15s %-15s %-10s %-10s %s\n", "alpha", "gamma", "predicted",
                  "fitted", "rate", "exponent", "agree");
    t << line;
    for (const auto& cell : sum.cells) {
        const std::string fitted = cell.fit ? to_string(cell.fit->tier) : "error";
        std::snprintf(line, sizeof line, "%-8.4g %-8.4g %-15s %-15s %-10.4g %-10.4g %s\n", cell.alpha,
                      cell.gamma, to_string(cell.prediction.tier).c_str(), fitted.c_str(),
                      cell.fit ? cell.fit->rate : NAN, cell.fit ? cell.fit->exponent : NAN,
                      cell.agree ? "yes" : "no");
        t << line;
        if (!cell.error.empty()) t << "    error: " << cell.error << "\n";
    }
    t << "agreement " << sum.agreed << "/" << sum.cells.size() << " (threshold "
      << format_real(sum.threshold) << "): " << (sum.passed ? "PASS" : "FAIL") << "\n";
    write_file(dir / "summary.txt", t.str(), nullptr);
    return sum;
}

EigenSummary run_eigen(const ExperimentConfig& c, const fs::path& dir) {
    fs::create_directories(dir);
    write_file(dir / "config.toml", canonical_text(c), nullptr);
    const Grid grid = build_grid(c);
    const auto pairs = solve_eigen(eigen_problem(c), grid, c.analysis.eigen_count);
    EigenSummary sum;
    sum.directory = dir;
    for (const auto& p : pairs) sum.eigenvalues.push_back(p.eigenvalue);
    write_with(dir / "eigenpairs.csv", [&](std::ostream& o) { write_eigenpairs_csv(o, pairs); }, nullptr);
    for (const auto& p : pairs)
        write_with(dir / ("eigenfunction-" + std::to_string(p.index) + ".csv"),
                   [&](std::ostream& o) { write_eigenfunction_csv(o, grid, p); }, nullptr);
    return sum;
}

std::vector<BoundSpec> run_bounds(const ExperimentConfig& c, const fs::path& dir) {
    fs::create_directories(dir);
    write_file(dir / "config.toml", canonical_text(c), nullptr);
    const Grid grid = build_grid(c);
    const ProblemSpec spec = build_problem(c);
    std::vector<double> u(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) u[i] = spec.initial(grid.node(i));
    const double sup0 = sup_norm(u);
    const double l2_ref = l2_norm(grid, u);
    auto specs = build_bounds(c, nullptr);
    const auto times = build_times(c);
    for (auto& s : specs) {
        // Without a solve the degenerate bound is reported per unit |u(t0)|.
        const bool per_unit = s.kind == BoundKind::degenerate_master;
        s.norm_y0 = per_unit ? 1.0 : std::sqrt(c.problem.L0) * l2_ref;
        if (s.kind == BoundKind::cauchy_kernel) s.z0_l1 = comparison_datum_l1(c.problem.L0, sup0);
        write_with(dir / ("bound-" + to_string(s.kind) + ".csv"), [&](std::ostream& o) {
            o << (per_unit ? "t,bound_per_unit_norm\n" : "t,bound\n");
            for (double t : times) write_csv_row(o, {format_real(t), format_real(s.evaluate(t))});
        }, nullptr);
    }
    return specs;
}

std::string report(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw UsageError("not a run directory: " + dir.string());
    std::ostringstream o;
    o << "run directory: " << dir.string() << "\n";
    auto slurp = [&](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream b;
        b << in.rdbuf();
        return b.str();
    };
    if (fs::exists(dir / "summary.txt")) o << slurp(dir / "summary.txt");
    if (fs::exists(dir / "report.json")) {
        const json r = json::parse(slurp(dir / "report.json"));
        o << "config hash: " << r.value("config_hash", "?") << "\n";
        const auto& tr = r["trajectory"];
        o << "snapshots: " << tr.value("snapshots", 0) << ", t_end " << tr.value("t_end", 0.0)
          << (tr.value("truncated", false) ? " (truncated)" : "") << "\n";
        o << "sup norm: " << tr.value("sup_initial", 0.0) << " -> " << tr.value("sup_final", 0.0) << "\n";
        for (const auto& b : r["bounds"])
            o << "bound " << b.value("kind", "?") << ": " << b.value("violations", 0) << " violations over "
              << b.value("records", 0) << " times, worst ratio " << b.value("worst_ratio", 0.0) << "\n";
        for (const auto& e : r["errors"]) o << "error: " << e.get<std::string>() << "\n";
        o << "wall time: " << r.value("wall_seconds", 0.0) << " s\n";
    }
    if (fs::exists(dir / "fit.json")) {
        const json f = json::parse(slurp(dir / "fit.json"));
        o << "predicted tier: " << f.value("predicted_tier", "?") << "\n";
        if (f["fit"].is_object())
            o << "fitted tier: " << f["fit"].value("tier", "?") << ", rate " << f["fit"]["rate"].dump()
              << ", exponent " << f["fit"]["exponent"].dump() << "\n";
        else
            o << "fitted tier: none\n";
        o << "agreement: " << (f.value("agree", false) ? "yes" : "no") << "\n";
    }
    if (fs::exists(dir / "eigenpairs.csv")) o << slurp(dir / "eigenpairs.csv");
    for (const auto& f : missing_artifacts(dir)) o << "MISSING artifact: " << f << "\n";
    return o.str();
}

std::vector<std::string> missing_artifacts(const fs::path& dir) {
    // The run kind is read off the files present; a directory with none of
    // the markers is treated as a solve run.
    auto has = [&](const char* f) { return fs::exists(dir / f); };
    bool bound_files = false;
    if (fs::is_directory(dir))
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().filename().string().rfind("bound-", 0) == 0) bound_files = true;
    std::vector<const char*> required;
    if (has("sweep.csv") || has("summary.txt"))
        required = {"config.toml", "sweep.csv", "summary.txt"};
    else if (has("eigenpairs.csv"))
        required = {"config.toml", "eigenpairs.csv"};
    else if (bound_files && !has("trajectory.csv"))
        required = {"config.toml"};
    else
        required = {"config.toml", "trajectory.csv", "bounds.csv", "fit.json"};
    std::vector<std::string> missing;
    for (const char* f : required)
        if (!has(f)) missing.emplace_back(f);
    return missing;
}

}  // namespace ncdecay::harness
