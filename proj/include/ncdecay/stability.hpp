#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncdecay/geometry.hpp"
#include "ncdecay/solver.hpp"
#include "ncdecay/tier.hpp"

namespace ncdecay {

struct RegimePrediction {
    double alpha = 0.0;
    double gamma = 0.0;
    Tier tier = Tier::undetermined;
    bool critical = false;       ///< gamma = 1/(2-alpha)
    bool supercritical = false;  ///< gamma > 1/(2-alpha): polynomial floor/ceiling sandwich only
};

RegimePrediction predict_regime(double alpha, double gamma);

/// Best member of one model family,  log|y| ≈ c - rate * f(s).
struct FamilyFit {
    Tier family = Tier::undetermined;
    double exponent = 0.0;  ///< epsilon, sigma; 0 for the log family
    double rate = 0.0;      ///< C~ or tau
    double intercept = 0.0;
    double residual = std::numeric_limits<double>::infinity();  ///< RMS in log|y|
};

struct DecayFit {
    Tier tier = Tier::undetermined;
    double rate = 0.0;       ///< C~ (exp/subexp) or tau (polynomial) of the winning family
    double exponent = 0.0;   ///< epsilon or sigma; NaN for polynomial
    double t_lo = 0.0, t_hi = 0.0;
    double residual = 0.0;
    std::array<FamilyFit, 3> families{};  ///< exponential, subexponential, polynomial
    std::size_t samples = 0;
};

struct ClassifierOptions {
    /// Regressors use s = 1 + k t when k > 0, raw t otherwise.
    double k = 0.0;
    /// Window spans this many decades back from the last time.
    double window_decades = 2.0;
    double margin = 0.8;
    std::vector<double> exp_exponents{1.0, 1.25, 1.5, 2.0};
    double sigma_lo = 0.05, sigma_hi = 0.95, sigma_step = 0.01;
};

/// Least-squares classification of a decaying series into a tier.
DecayFit classify_decay(std::span<const double> t, std::span<const double> norm,
                        const ClassifierOptions& options = {});

struct SweepRun {
    std::size_t cells = 400;
    std::size_t intervals = 400;
    double t_max = 1e4;
    double theta = 0.5;
    double diffusion = 1.0;
    double L0 = 1.0;
    double k = 1.0;
    /// Datum on the reference interval; the default is sin(pi x).
    InitialDatum initial = InitialDatum::sine();
    IntegrationOptions integration{.theta = 0.5, .drift = DriftScheme::hybrid};
    ClassifierOptions classifier{};
    std::size_t threads = 1;
};

struct SweepCell {
    double alpha = 0.0;
    double gamma = 0.0;
    RegimePrediction prediction;
    std::optional<DecayFit> fit;
    std::string error;  ///< non-empty when the cell failed
    bool agree = false;
};

/// Solves and classifies one (alpha, gamma) cell.
SweepCell run_cell(double alpha, double gamma, const SweepRun& run);

/// Row-major alpha x gamma matrix of cells, computed by a bounded worker pool;
/// the output order is independent of the thread count.
std::vector<SweepCell> regime_sweep(std::span<const double> alphas, std::span<const double> gammas,
                                    const SweepRun& run);

/// Agreement rule: equal tiers; a supercritical cell agrees when the fit is polynomial.
bool tiers_agree(const RegimePrediction& prediction, Tier fitted);

void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells);

/// t -> (1+kt)^{-power} * norm0, the lower envelope built from the n-th
/// eigenpair of the critical-domain problem.
struct ComparisonFloor {
    double power = 0.0;
    double norm0 = 0.0;
    double k = 1.0;
    int index = 1;
    double eigenvalue = 0.0;
    std::vector<double> eigenfunction;  ///< on `cells` uniform/graded grid nodes
    double operator()(double t) const;
};

/// alpha = 0: power mu_n, norm0 = |phi_n|_inf (self-similar problem);
/// alpha > 0: power lambda_n/k, norm0 = |phi_n|_2 (critical problem).
/// Rejects gamma <= gamma_critical(alpha).
ComparisonFloor comparison_floor(double alpha, const BoundaryLaw& law, int n,
                                 double diffusion = 1.0, std::size_t cells = 1000);

}  // namespace ncdecay
