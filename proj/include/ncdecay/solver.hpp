#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ncdecay/geometry.hpp"
#include "ncdecay/grid.hpp"
#include "ncdecay/tridiagonal.hpp"

namespace ncdecay {

/// Initial profile, stored in reference coordinates: y0(xi) = profile(xi / L0).
class InitialDatum {
public:
    InitialDatum() = default;
    /// Profile given directly on the reference interval [0, 1].
    static InitialDatum reference(std::function<double(double)> profile);
    /// y0 given on the physical interval (0, L0).
    static InitialDatum physical(std::function<double(double)> y0, double L0);
    /// Nodal samples on a reference grid, linearly interpolated.
    static InitialDatum samples(const Grid& grid, std::vector<double> values);
    /// sin(m pi x).
    static InitialDatum sine(int mode = 1);
    /// Smooth compact bump centred at c with half-width w (reference units).
    static InitialDatum bump(double centre = 0.5, double half_width = 0.25);

    double operator()(double x) const { return profile_(x); }
    bool empty() const { return !profile_; }

private:
    explicit InitialDatum(std::function<double(double)> f) : profile_(std::move(f)) {}
    std::function<double(double)> profile_;
};

/// One PDE instance  y_t - a (xi^alpha y_xi)_xi = 0 on (0, l(t)).
struct ProblemSpec {
    double alpha = 0.0;
    double diffusion = 1.0;
    BoundaryLaw law{};
    InitialDatum initial = InitialDatum::sine();
    /// Regularised family: face coefficient p x^alpha + 3/(2n).
    std::optional<int> regularization_level;

    /// Checks alpha in [0,1), a > 0, law, Dirichlet compatibility of the datum.
    void validate() const;
    CoefficientSchedule schedule() const;
};

/// Returns `spec` with regularization level n (n >= 1, alpha > 0).
ProblemSpec regularize(const ProblemSpec& spec, int n);

enum class DriftScheme {
    upwind,  ///< first order, always an M-matrix
    hybrid,  ///< second-order centred where the row stays an M-matrix, upwind elsewhere
};

/// Tridiagonal discretisation of u -> p (x^alpha u_x)_x - q x u_x on all
/// grid nodes; the two Dirichlet rows are zero.
Tridiagonal assemble_spatial_operator(const ProblemSpec& spec, const Grid& grid, double t,
                                      DriftScheme drift = DriftScheme::upwind);
Tridiagonal assemble_spatial_operator(const CoefficientSchedule& schedule,
                                      std::optional<int> regularization_level, const Grid& grid,
                                      double t, DriftScheme drift);

/// Mean of x^alpha over [a, b] in the two-point-flux sense:
/// (b - a) / ∫_a^b x^{-alpha} dx.
double face_coefficient(double alpha, double a, double b);

/// One theta step (I - theta dt A(t+dt)) u+ = (I + (1-theta) dt A(t)) u with
/// both endpoint values pinned to zero.
std::vector<double> step(const ProblemSpec& spec, const Grid& grid, std::span<const double> state,
                         double t, double dt, double theta,
                         DriftScheme drift = DriftScheme::upwind);

enum class TimeScheme {
    theta,             ///< one theta step per substep
    fractional_theta,  ///< three theta substeps (theta/1-2theta/theta split), strongly A-stable
};

struct IntegrationOptions {
    TimeScheme scheme = TimeScheme::theta;
    /// Weight of the plain theta scheme; ignored by fractional_theta.
    double theta = 0.5;
    DriftScheme drift = DriftScheme::hybrid;
    /// Backward-Euler half steps taken first when theta < 1.
    int startup_steps = 4;
    /// Target log-decrement of the sup norm per substep; <= 0 takes exactly
    /// one step per output interval.
    double max_log_decrement = 0.02;
    double max_growth = 1.25;
    /// Integration stops once the sup norm drops below this value.
    double norm_floor = 1e-250;
    std::size_t max_substeps = 50'000'000;
};

struct Snapshot {
    double t = 0.0;
    double length = 0.0;
    std::vector<double> values;
    double sup_norm = 0.0;
    double l2_norm = 0.0;      ///< ‖u‖ on the reference interval (0, 1)
    double weighted_l2 = 0.0;  ///< K-weighted norm of the critical eigenproblem
};

/// Time-ordered snapshots of u on the reference grid.
class Trajectory {
public:
    Trajectory(Grid grid, double alpha, double diffusion, BoundaryLaw law);

    void append(double t, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    double alpha() const { return alpha_; }
    double diffusion() const { return diffusion_; }
    const BoundaryLaw& law() const { return law_; }
    std::span<const Snapshot> snapshots() const { return snapshots_; }
    const Snapshot& at(std::size_t i) const { return snapshots_.at(i); }
    std::size_t size() const { return snapshots_.size(); }

    /// True when integration stopped at the norm floor before the last requested time.
    bool truncated() const { return truncated_; }
    void mark_truncated() { truncated_ = true; }

    /// y(xi, t_i) = u(xi / l(t_i), t_i).
    double physical_value(std::size_t i, double xi) const;
    /// ‖y(., t_i)‖ on (0, l(t_i)) = sqrt(l) ‖u‖.
    double physical_l2(std::size_t i) const;

    std::vector<double> times() const;
    std::vector<double> sup_norms() const;
    std::vector<double> l2_norms() const;

private:
    Grid grid_;
    double alpha_;
    double diffusion_;
    BoundaryLaw law_;
    std::vector<Snapshot> snapshots_;
    bool truncated_ = false;
};

/// Integrates the transformed problem through `times` (first entry 0).
Trajectory solve_moving(const ProblemSpec& spec, const Grid& grid, std::span<const double> times,
                        const IntegrationOptions& options = {});

/// The same integrator on the cylinder (0, L0) with p = a L0^{alpha-2}, q = 0.
Trajectory solve_fixed(const ProblemSpec& spec, const Grid& grid, std::span<const double> times,
                       const IntegrationOptions& options = {});

/// Output times t_j = ((1 + k t_max)^{j/M} - 1)/k, j = 0..M.
std::vector<double> geometric_times(double k, double t_max, std::size_t intervals);

/// CSV export: t,l_t,sup_norm,l2_norm,weighted_l2.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

/// Discrete sup norm max_i |u_i|.
double sup_norm(std::span<const double> values);
/// sqrt(sum_i u_i^2 w_i) with control-volume widths.
double l2_norm(const Grid& grid, std::span<const double> values);
/// sum over edges of ((u_{i+1}-u_i)/e_i)^2 e_i = discrete ∫ u_x^2.
double dirichlet_energy(const Grid& grid, std::span<const double> values);

/// Solution of the Cauchy problem z_t = a z_xx with datum z0 supported in
/// [lo, hi], by adaptive Gauss-Kronrod quadrature.
double heat_kernel_solution(const std::function<double(double)>& z0, double lo, double hi,
                            double a, double x, double t);
/// (4 pi a t)^{-1/2} ‖z0‖_{L1}.
double heat_kernel_sup_bound(double z0_l1, double a, double t);

}  // namespace ncdecay
