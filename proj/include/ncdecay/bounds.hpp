#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ncdecay/geometry.hpp"
#include "ncdecay/solver.hpp"
#include "ncdecay/tier.hpp"

namespace ncdecay {

/// sup |y(T)| <= |y0|_2 (∫_0^T rho e^{rho alpha(t)} / l(t) dt)^{-1/2}.
double master_bound_nondegenerate(double rho, const BoundaryLaw& law, double norm_y0, double T);
/// Logarithm of the same; finite even when the value under/overflows.
double log_master_bound_nondegenerate(double rho, const BoundaryLaw& law, double norm_y0, double T);

/// ∫_0^T e^{rho alpha(t)} / l(t) dt by adaptive quadrature, returned as a logarithm.
double log_master_integral(double rho, const BoundaryLaw& law, double T);
/// Closed form of the same integral at gamma = 1/2.
double master_integral_half(double rho, const BoundaryLaw& law, double T);

/// |y(T)|_2 <= e^{-rho alpha(T) / 2} |y0|_2.
double l2_bound(double rho, const BoundaryLaw& law, double norm_y0, double T);

/// Data for the gamma > 1/2 kernel envelope (4 pi a T)^{-1/2} |z0|_1.
struct KernelEnvelope {
    double diffusion = 1.0;
    double z0_l1 = 0.0;
};

/// |z0|_1 for the trapezoidal comparison datum: |y0|_inf on (0, L0), linear
/// ramp down to 0 on (L0, 2 L0).
double comparison_datum_l1(double L0, double sup_y0);

struct RegimeBound {
    Tier tier = Tier::undetermined;
    double value = 0.0;
    double threshold = 0.0;  ///< smallest T for which the relaxation holds
};

/// Threshold T beyond which the regime relaxation of the master bound is valid.
double regime_threshold(double rho, const BoundaryLaw& law);

/// Closed-form regime bound (alpha = 0); rejects T below the threshold.
RegimeBound regime_bound(double rho, const BoundaryLaw& law, double norm_y0, double T,
                         std::optional<KernelEnvelope> kernel = std::nullopt);

enum class DegenerateIntegral {
    automatic,   ///< closed form when beta and p come from the same law, else quadrature
    closed_form,
    quadrature,
};

/// sup |u(T)| <= |u(t0)|_2 ((1-alpha) e^{-beta(t0)} ∫_{t0}^T e^{beta} p dt)^{-1/2}.
/// Rejects beta that is inadmissible on [t0, T].
double master_bound_degenerate(double alpha, const CoefficientSchedule& schedule,
                               const WeightFunction& beta, double norm_u_t0, double t0, double T,
                               DegenerateIntegral method = DegenerateIntegral::automatic);
double log_master_bound_degenerate(double alpha, const CoefficientSchedule& schedule,
                                   const WeightFunction& beta, double norm_u_t0, double t0,
                                   double T,
                                   DegenerateIntegral method = DegenerateIntegral::automatic);

enum class BoundKind {
    nondeg_master,
    l2_remark,
    exp_regime,
    subexp_regime,
    poly_critical,
    cauchy_kernel,
    degenerate_master,
};

std::string to_string(BoundKind kind);
BoundKind bound_kind_from_string(const std::string& name);

/// One bound instance. A NaN norm_y0 means "take it from the trajectory":
/// the physical L2 norm at t = 0, or for degenerate_master the reference
/// L2 norm at the first snapshot with t >= t0 (which also becomes t0).
struct BoundSpec {
    BoundKind kind = BoundKind::nondeg_master;
    double rho = 1.0;
    BoundaryLaw law{};
    double alpha = 0.0;
    double diffusion = 1.0;
    double norm_y0 = std::numeric_limits<double>::quiet_NaN();
    double z0_l1 = std::numeric_limits<double>::quiet_NaN();  ///< cauchy_kernel; NaN: from sup|y0|
    std::optional<WeightFunction> beta;                        ///< degenerate_master
    double t0 = 0.0;

    /// Bound value at T (+inf where the bound is vacuous).
    double evaluate(double T) const;
};

struct BoundRecord {
    double t = 0.0;
    double norm = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
    bool satisfied = true;
};

struct BoundReport {
    BoundKind kind = BoundKind::nondeg_master;
    double slack = 0.05;
    std::vector<BoundRecord> records;
    std::size_t violations = 0;
    bool ok() const { return violations == 0; }
    double worst_ratio() const;
};

/// Compares the trajectory's norm (sup, or physical L2 for l2_remark) with
/// the bound at every recorded t past t0 and the regime threshold.
BoundReport check_bound(const Trajectory& trajectory, const BoundSpec& spec, double slack = 0.05);

void write_bound_csv(std::ostream& out, const BoundReport& report);

}  // namespace ncdecay
