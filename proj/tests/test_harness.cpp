#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "ncdecay/harness.hpp"
#include "ncdecay/spectral.hpp"

using namespace ncdecay;
using namespace ncdecay::harness;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("ncdecay-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream b;
    b << in.rdbuf();
    return b.str();
}

std::string field_of(std::string_view text, const Environment& env = {}) {
    try {
        parse_config(text, env);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

constexpr std::string_view kSine = R"(
[problem]
alpha = 0.0
a = 1.0
L0 = 1.0
k = 1.0
gamma = 0.0
initial = "sine"

[numerics]
N = 128
t_max = 10.0
intervals = 200
)";

}  // namespace

TEST_CASE("config errors name the field") {
    CHECK(field_of("[problem]\ngamma = \"half\"\n") == "problem.gamma");
    try {
        parse_config("[problem]\ngamma = \"half\"\n");
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("problem.gamma") != std::string::npos);
        CHECK(std::string(e.what()).find("number") != std::string::npos);
    }
    CHECK(field_of("[problem]\ngama = 0.5\n") == "problem.gama");
    CHECK(field_of("[problems]\ngamma = 0.5\n") == "problems");
    CHECK(field_of("[numerics]\nt_max = -1.0\n") == "numerics.t_max");
    CHECK(field_of("[numerics]\nscheme = \"rk4\"\n") == "numerics.scheme");
    CHECK(field_of("[problem]\nalpha = 1.0\n") == "problem.alpha");
    CHECK(field_of("[problem]\ninitial = \"eigen:200\"\n[numerics]\nN = 400\n") == "problem.initial");
    CHECK(field_of("[analysis]\nbounds = [\"loosest\"]\n") == "analysis.bounds");
    CHECK_THROWS_AS(parse_config("[problem\nalpha = 0.2\n"), ConfigError);
    CHECK_NOTHROW(parse_config(kSine));
}

TEST_CASE("environment overrides") {
    const auto c = parse_config(kSine, {{"NCDECAY_PROBLEM_GAMMA", "0.25"}, {"NCDECAY_SEED", "7"},
                                       {"NCDECAY_NUMERICS_SCHEME", "theta"}});
    CHECK(c.problem.gamma == 0.25);
    CHECK(c.seed == 7);
    CHECK(c.numerics.scheme == "theta");
    CHECK(field_of(kSine, {{"NCDECAY_PROBLEM_GAMA", "0.25"}}) == "problem.gama");
    CHECK(field_of(kSine, {{"NCDECAY_PROBLEM_GAMMA", "fast"}}) == "problem.gamma");
    // Variables without the prefix are ignored.
    CHECK_NOTHROW(parse_config(kSine, {{"HOME", "/root"}}));
}

TEST_CASE("canonical text and hash") {
    const auto a = parse_config(kSine);
    const auto b = parse_config(canonical_text(a));
    CHECK(canonical_text(a) == canonical_text(b));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 64);
    CHECK(config_hash(a).find_first_not_of("0123456789abcdef") == std::string::npos);
    // Formatting-only differences do not change the hash.
    const auto c = parse_config("# comment\n[numerics]\nintervals=200\nt_max=1e1\nN=128\n[problem]\n"
                                "gamma=0\nalpha=0\n");
    CHECK(config_hash(a) == config_hash(c));
    auto d = a;
    d.problem.gamma = 0.1;
    CHECK(config_hash(a) != config_hash(d));
}

TEST_CASE("derived seeds") {
    CHECK(derive_seed(1, "hardy") == derive_seed(1, "hardy"));
    CHECK(derive_seed(1, "hardy") != derive_seed(1, "comparison"));
    CHECK(derive_seed(1, "hardy") != derive_seed(2, "hardy"));
}

TEST_CASE("frozen-domain sine run decays at a pi^2 / L0^2") {
    TempDir tmp;
    auto c = parse_config(kSine);
    c.problem.a = 0.7;
    c.problem.L0 = 1.3;
    c.numerics.t_max = 20.0;
    const auto rep = run_solve(c, tmp.path);
    CHECK(rep.errors.empty());
    REQUIRE(rep.fit.has_value());
    CHECK(rep.fit->tier == Tier::exponential);
    // The classifier regresses on s = 1 + kt, so the rate per unit time is rate * k.
    CHECK(rep.fit->rate * c.problem.k == Approx(0.7 * std::numbers::pi * std::numbers::pi / 1.69).epsilon(0.02));
    CHECK(rep.prediction.tier == Tier::exponential);
    CHECK(rep.agree);
    for (const auto& b : rep.bounds) CHECK(b.ok());
}

TEST_CASE("eigen:1 self-similar run is polynomial with the eigenvalue power") {
    TempDir tmp;
    auto c = parse_config(R"(
[problem]
gamma = 0.5
initial = "eigen:1"
[numerics]
N = 256
t_max = 10000.0
intervals = 200
)");
    const auto rep = run_solve(c, tmp.path);
    CHECK(rep.errors.empty());
    REQUIRE(rep.fit.has_value());
    CHECK(rep.fit->tier == Tier::polynomial);
    const auto mu = solve_eigen(EigenProblem::selfsimilar(1, 1, 1), Grid::uniform(256), 1)[0].eigenvalue;
    CHECK(rep.fit->rate == Approx(mu).epsilon(0.05));
    CHECK(rep.agree);
}

TEST_CASE("artifacts are complete and reproducible") {
    TempDir t1, t2;
    auto c = parse_config(kSine);
    c.problem.gamma = 0.3;
    run_solve(c, t1.path);
    run_solve(c, t2.path);
    CHECK(missing_artifacts(t1.path).empty());
    for (const char* f : {"config.toml", "trajectory.csv", "bounds.csv", "fit.json", "norms.svg", "report.json"})
        CHECK(fs::exists(t1.path / f));
    for (const auto& e : fs::directory_iterator(t1.path)) {
        const auto name = e.path().filename().string();
        if (e.path().extension() == ".csv" || e.path().extension() == ".svg" || name == "config.toml") {
            const auto a = slurp(e.path());
            CHECK_MESSAGE(a == slurp(t2.path / name), name);
            CHECK(a.find('\r') == std::string::npos);
        }
    }
    const auto svg = slurp(t1.path / "norms.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    const auto text = report(t1.path);
    CHECK(text.find("fitted tier") != std::string::npos);
    CHECK(text.find("MISSING") == std::string::npos);

    fs::remove(t1.path / "bounds.csv");
    CHECK(missing_artifacts(t1.path) == std::vector<std::string>{"bounds.csv"});
    CHECK(report(t1.path).find("MISSING artifact: bounds.csv") != std::string::npos);
    CHECK_THROWS_AS(report(t1.path / "nope"), UsageError);
}

TEST_CASE("config echo parses back to the same config") {
    TempDir tmp;
    const auto c = parse_config(kSine);
    run_solve(c, tmp.path);
    CHECK(config_hash(load_config(tmp.path / "config.toml", {})) == config_hash(c));
}

TEST_CASE("run directory naming") {
    auto c = parse_config(kSine);
    c.output.directory = "/tmp/runs";
    CHECK(run_directory(c, "solve", std::nullopt) == fs::path("/tmp/runs") / ("solve-" + config_hash(c).substr(0, 12)));
    CHECK(run_directory(c, "solve", fs::path("/x/y")) == fs::path("/x/y"));
}

TEST_CASE("file datum") {
    TempDir tmp;
    {
        std::ofstream f(tmp.path / "datum.csv");
        f << "x,value\n";
        for (int i = 0; i <= 100; ++i) f << i / 100.0 << "," << std::sin(std::numbers::pi * i / 100.0) << "\n";
    }
    std::ofstream(tmp.path / "cfg.toml") << "[problem]\ninitial = \"file:datum.csv\"\n[numerics]\nN = 64\n";
    const auto c = load_config(tmp.path / "cfg.toml", {});
    const auto spec = build_problem(c);
    CHECK(spec.initial(0.5) == Approx(1.0).epsilon(1e-12));
    CHECK(spec.initial(0.25) == Approx(std::sin(std::numbers::pi / 4)).epsilon(1e-3));
    std::ofstream(tmp.path / "bad.toml") << "[problem]\ninitial = \"file:missing.csv\"\n";
    CHECK_THROWS_AS(build_problem(load_config(tmp.path / "bad.toml", {})), ConfigError);
}

TEST_CASE("single-cell sweep matches run_solve") {
    TempDir t1, t2;
    auto c = parse_config(R"(
[problem]
alpha = 0.25
gamma = 0.3
[numerics]
N = 100
t_max = 1000.0
intervals = 150
[analysis]
sweep_alpha = [0.25]
sweep_gamma = [0.3]
agreement_threshold = 1.0
)");
    const auto sweep = run_sweep(c, t1.path);
    const auto solve = run_solve(c, t2.path);
    REQUIRE(sweep.cells.size() == 1);
    REQUIRE(sweep.cells[0].fit.has_value());
    REQUIRE(solve.fit.has_value());
    CHECK(sweep.cells[0].fit->tier == solve.fit->tier);
    CHECK(sweep.cells[0].fit->rate == solve.fit->rate);
    CHECK(sweep.cells[0].fit->exponent == Approx(solve.fit->exponent));
    CHECK(missing_artifacts(t1.path).empty());
    CHECK(slurp(t1.path / "summary.txt").find("agreement") != std::string::npos);

    c.analysis.sweep_gamma.clear();
    CHECK_THROWS_AS(run_sweep(c, t1.path), ConfigError);
}

TEST_CASE("sweep through the critical exponent at alpha = 1/2") {
    TempDir tmp;
    const auto c = parse_config(R"(
[problem]
alpha = 0.5
[numerics]
N = 200
t_max = 10000.0
intervals = 300
[analysis]
sweep_alpha = [0.5]
sweep_gamma = [0.5, 0.6666666666666666, 0.8]
agreement_threshold = 1.0
)");
    const auto s = run_sweep(c, tmp.path);
    REQUIRE(s.cells.size() == 3);
    const Tier expect[] = {Tier::subexponential, Tier::polynomial, Tier::polynomial};
    for (int i = 0; i < 3; ++i) {
        REQUIRE(s.cells[i].fit.has_value());
        CHECK(s.cells[i].fit->tier == expect[i]);
    }
    CHECK(s.passed);
}

TEST_CASE("eigen and bounds commands") {
    TempDir t1, t2;
    auto c = parse_config("[problem]\nalpha = 0.5\ngamma = 0.6666666666666666\n[numerics]\nN = 200\n");
    const auto e = run_eigen(c, t1.path);
    CHECK(e.eigenvalues.size() == 3);
    CHECK(fs::exists(t1.path / "eigenpairs.csv"));
    CHECK(fs::exists(t1.path / "eigenfunction-3.csv"));
    CHECK(missing_artifacts(t1.path).empty());

    auto b = parse_config(kSine);
    const auto specs = run_bounds(b, t2.path);
    CHECK_FALSE(specs.empty());
    for (const auto& s : specs) CHECK(fs::exists(t2.path / ("bound-" + to_string(s.kind) + ".csv")));
    CHECK(missing_artifacts(t2.path).empty());
}

TEST_CASE("verify selector") {
    try {
        run_verify("nope", 1, 1);
        FAIL("no error");
    } catch (const UsageError& e) {
        const std::string m = e.what();
        for (const auto& s : suite_names()) CHECK(m.find(s) != std::string::npos);
    }
    const auto r = run_verify("hardy", 20240607, 1);
    REQUIRE(r.size() == 1);
    CHECK(r[0].name == "hardy");
    CHECK(r[0].trials == 800);
    CHECK(r[0].passed());
}
