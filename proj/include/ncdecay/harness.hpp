#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ncdecay/bounds.hpp"
#include "ncdecay/error.hpp"
#include "ncdecay/solver.hpp"
#include "ncdecay/stability.hpp"

namespace ncdecay::harness {

/// Parse/validation failure naming the offending key ("problem.gamma").
class ConfigError : public InvalidArgument {
public:
    ConfigError(std::string field, const std::string& message);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Bad command-line usage (unknown suite, missing file).
class UsageError : public InvalidArgument {
public:
    explicit UsageError(const std::string& message) : InvalidArgument("harness", message) {}
};

struct ProblemBlock {
    double alpha = 0.0;
    double a = 1.0;       ///< diffusion constant
    double L0 = 1.0;      ///< initial length
    double k = 1.0;       ///< 1/time
    double gamma = 0.5;
    std::string initial = "sine";  ///< sine | sine:m | bump | eigen:n | file:PATH
};

struct NumericsBlock {
    std::size_t cells = 400;
    std::optional<double> grading;  ///< default: 1/(1-alpha)
    double theta = 0.5;
    std::string scheme = "fractional-theta";  ///< theta | fractional-theta
    std::string drift = "hybrid";             ///< upwind | hybrid
    std::string time_grid = "geometric";      ///< geometric | uniform
    std::size_t intervals = 400;
    double t_max = 1e4;
    double max_log_decrement = 0.02;
    std::optional<int> regularization;
};

struct AnalysisBlock {
    std::vector<std::string> bounds{"auto"};
    double rho = std::numeric_limits<double>::quiet_NaN();  ///< default: a
    double slack = 0.05;
    double window_decades = 2.0;
    bool classify = true;
    std::vector<double> sweep_alpha{0.0, 0.25, 0.5};
    std::vector<double> sweep_gamma{-1.0, 0.25, 0.9};
    double agreement_threshold = 8.0 / 9.0;  ///< fraction of agreeing cells
    int eigen_count = 3;
    std::string eigen_kind = "auto";  ///< auto | selfsimilar | degenerate-critical
};

struct OutputBlock {
    std::string directory = "runs";
    std::vector<std::string> formats{"csv", "svg", "json"};
};

struct ExperimentConfig {
    ProblemBlock problem;
    NumericsBlock numerics;
    AnalysisBlock analysis;
    OutputBlock output;
    std::uint64_t seed = 20240607;
    std::size_t threads = 1;
    std::filesystem::path base_dir = ".";  ///< resolves file: data

    bool wants(std::string_view format) const;
};

using Environment = std::map<std::string, std::string>;

/// Variables of the process environment carrying the override prefix.
Environment process_environment();
inline constexpr std::string_view kEnvPrefix = "NCDECAY_";

/// TOML text -> config. Unknown keys are errors. Environment entries
/// NCDECAY_<BLOCK>_<KEY> (or NCDECAY_<KEY> for top-level keys) override the
/// file; their values are read as TOML values, falling back to strings.
ExperimentConfig parse_config(std::string_view text, const Environment& env = {},
                              std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path, const Environment& env);

/// Fixed-order, fixed-format TOML rendering of every key.
std::string canonical_text(const ExperimentConfig& config);
/// SHA-256 (hex) of canonical_text.
std::string config_hash(const ExperimentConfig& config);

/// Deterministic per-purpose seed derived from the root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose);

// ---------------------------------------------------------------- runs

ProblemSpec build_problem(const ExperimentConfig& config);
Grid build_grid(const ExperimentConfig& config);
std::vector<double> build_times(const ExperimentConfig& config);
IntegrationOptions build_integration(const ExperimentConfig& config);
std::vector<BoundSpec> build_bounds(const ExperimentConfig& config, const Trajectory* trajectory);

struct TrajectorySummary {
    std::size_t cells = 0;
    std::size_t snapshots = 0;
    double t_end = 0.0;
    bool truncated = false;
    double sup_initial = 0.0, sup_final = 0.0;
    double l2_initial = 0.0, l2_final = 0.0;
};

struct RunReport {
    std::string command;
    std::string config_hash;
    std::filesystem::path directory;
    TrajectorySummary trajectory;
    std::vector<BoundReport> bounds;
    std::optional<DecayFit> fit;
    RegimePrediction prediction;
    bool agree = false;
    std::vector<std::string> errors;  ///< "module: message"
    std::vector<std::string> artifacts;
    double wall_seconds = 0.0;
};

/// Run directory: `out` when given, else output.directory/<command>-<hash12>.
std::filesystem::path run_directory(const ExperimentConfig& config, std::string_view command,
                                    const std::optional<std::filesystem::path>& out);

RunReport run_solve(const ExperimentConfig& config, const std::filesystem::path& dir);

struct SweepSummary {
    std::vector<SweepCell> cells;
    std::size_t agreed = 0;
    double threshold = 0.0;
    bool passed = false;
    std::filesystem::path directory;
};
SweepSummary run_sweep(const ExperimentConfig& config, const std::filesystem::path& dir);

struct EigenSummary {
    std::vector<double> eigenvalues;
    std::filesystem::path directory;
};
EigenSummary run_eigen(const ExperimentConfig& config, const std::filesystem::path& dir);

/// Evaluates the configured bounds on the time grid without solving.
std::vector<BoundSpec> run_bounds(const ExperimentConfig& config, const std::filesystem::path& dir);

/// Human-readable summary of a finished run directory.
std::string report(const std::filesystem::path& dir);
/// Required files absent from a run directory (empty when complete).
std::vector<std::string> missing_artifacts(const std::filesystem::path& dir);

// ---------------------------------------------------------------- verification

struct SuiteResult {
    std::string name;
    std::size_t trials = 0;
    std::size_t failures = 0;
    double worst = 0.0;  ///< suite-specific worst margin
    std::string detail;
    bool passed() const { return failures == 0 && trials > 0; }
};

const std::vector<std::string>& suite_names();

/// Discrete Hardy sums: lhs = sum x^{alpha-2} u^2 w (first interior cell
/// dropped for alpha > 1/2), rhs = 4/(1-alpha)^2 sum x_face^alpha u_x^2 e.
struct HardySums {
    double lhs = 0.0;
    double rhs = 0.0;
};
HardySums discrete_hardy(const Grid& grid, std::span<const double> u, double alpha);
/// One random function with u(0) = 0 (sine series, near-extremal power, or
/// random piecewise linear), fully determined by `seed`.
std::vector<double> random_hardy_function(std::uint64_t seed, const Grid& grid, double alpha);

/// One randomly drawn configuration of the bound-dominance suite.
struct BoundDominanceCase {
    BoundKind kind = BoundKind::nondeg_master;
    ProblemSpec spec;
    double rho = 1.0;                    ///< nondeg_master
    std::optional<WeightFunction> beta;  ///< degenerate_master
};
/// per_bound nondegenerate cases followed by per_bound degenerate ones.
std::vector<BoundDominanceCase> bound_dominance_cases(std::uint64_t seed, std::size_t per_bound);
BoundReport run_bound_case(const BoundDominanceCase& c, double t_max);

SuiteResult verify_max_principle(std::uint64_t seed, std::size_t runs = 100);
SuiteResult verify_comparison(std::uint64_t seed, std::size_t runs = 100);
SuiteResult verify_hardy(std::uint64_t seed, std::size_t per_alpha = 200);
SuiteResult verify_energy_monotonicity(std::uint64_t seed, std::size_t runs = 20);
SuiteResult verify_eigen_oracle(std::size_t cells = 2000);
SuiteResult verify_bound_dominance(std::uint64_t seed, std::size_t per_bound = 20,
                                   double t_max = 50.0, std::size_t threads = 1);

/// Runs one suite by name, or every suite for "all"; throws UsageError otherwise.
std::vector<SuiteResult> run_verify(std::string_view selector, std::uint64_t seed,
                                    std::size_t threads = 1);

}  // namespace ncdecay::harness
