#include "ncdecay/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "ncdecay/csv.hpp"
#include "ncdecay/error.hpp"

namespace ncdecay {

namespace {

constexpr const char* kModule = "solver";

// Sup-norm threshold below which a datum counts as "vanishing" at an endpoint.
constexpr double kEndpointTolerance = 1e-12;

}  // namespace

// ---------------------------------------------------------------- datum

InitialDatum InitialDatum::reference(std::function<double(double)> profile) {
    if (!profile) throw InvalidArgument(kModule, "initial profile is empty");
    return InitialDatum(std::move(profile));
}

InitialDatum InitialDatum::physical(std::function<double(double)> y0, double L0) {
    if (!y0) throw InvalidArgument(kModule, "initial profile is empty");
    if (!(L0 > 0.0)) throw InvalidArgument(kModule, "L0 must be positive");
    return InitialDatum([f = std::move(y0), L0](double x) { return f(L0 * x); });
}

InitialDatum InitialDatum::samples(const Grid& grid, std::vector<double> values) {
    if (values.size() != grid.size())
        throw InvalidArgument(kModule, "sample count does not match the grid");
    return InitialDatum([grid, v = std::move(values)](double x) { return grid.interpolate(v, x); });
}

InitialDatum InitialDatum::sine(int mode) {
    if (mode < 1) throw InvalidArgument(kModule, "sine mode must be >= 1");
    const double w = mode * std::numbers::pi;
    return InitialDatum([w](double x) { return std::sin(w * x); });
}

InitialDatum InitialDatum::bump(double centre, double half_width) {
    if (!(half_width > 0.0) || centre - half_width < 0.0 || centre + half_width > 1.0)
        throw InvalidArgument(kModule, "bump must lie inside [0, 1]");
    return InitialDatum([centre, half_width](double x) {
        const double r = (x - centre) / half_width;
        if (std::abs(r) >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - r * r));
    });
}

// ---------------------------------------------------------------- spec

void ProblemSpec::validate() const {
    require_weak_degeneracy(alpha, kModule);
    if (!(diffusion > 0.0) || !std::isfinite(diffusion))
        throw InvalidArgument(kModule, "diffusion constant must be positive");
    (void)BoundaryLaw::make(law.L0, law.k, law.gamma);
    if (initial.empty()) throw InvalidArgument(kModule, "initial datum missing");
    if (std::abs(initial(0.0)) > kEndpointTolerance || std::abs(initial(1.0)) > kEndpointTolerance)
        throw InvalidArgument(kModule, "initial datum must vanish at both endpoints");
    if (regularization_level && *regularization_level < 1)
        throw InvalidArgument(kModule, "regularization level must be >= 1");
}

CoefficientSchedule ProblemSpec::schedule() const {
    return transformed_coefficients(law, alpha, diffusion);
}

ProblemSpec regularize(const ProblemSpec& spec, int n) {
    if (n < 1) throw InvalidArgument(kModule, "regularization level must be >= 1");
    if (!(spec.alpha > 0.0)) throw InvalidArgument(kModule, "regularization needs alpha > 0");
    ProblemSpec out = spec;
    out.regularization_level = n;
    return out;
}

// ---------------------------------------------------------------- operator

double face_coefficient(double alpha, double a, double b) {
    if (!(b > a) || a < 0.0) throw InvalidArgument(kModule, "face interval must satisfy 0 <= a < b");
    if (alpha == 0.0) return 1.0;
    const double e = 1.0 - alpha;
    // b^e - a^e = b^e (1 - (a/b)^e), the bracket via expm1 for adjacent nodes.
    const double be = std::pow(b, e);
    const double span = a == 0.0 ? be : -be * std::expm1(e * std::log(a / b));
    return (b - a) * e / span;
}

Tridiagonal assemble_spatial_operator(const CoefficientSchedule& schedule,
                                      std::optional<int> regularization_level, const Grid& grid,
                                      double t, DriftScheme drift) {
    if (!(t >= 0.0)) throw InvalidArgument(kModule, "time must be nonnegative");
    const double p = schedule.p(t);
    const double q = schedule.q(t);
    if (!(p > 0.0) || !std::isfinite(p))
        throw InvalidArgument(kModule, "singular assembly: p(t) must be positive");
    const double reg = regularization_level ? 1.5 / *regularization_level : 0.0;

    const std::size_t n = grid.size();
    Tridiagonal A(n);
    // Edge conductances c_j / e_j.
    std::vector<double> w(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double c = p * face_coefficient(schedule.alpha, grid.node(j), grid.node(j + 1)) + reg;
        w[j] = c / grid.edge(j);
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h = grid.control_width(i);
        double lo = w[i - 1] / h;
        double up = w[i] / h;
        // u_t = ... + v u_x with v = -q x.
        const double v = -q * grid.node(i);
        const double em = grid.edge(i - 1);
        const double ep = grid.edge(i);
        bool centred = false;
        if (drift == DriftScheme::hybrid && v != 0.0) {
            const double cp = v * em / (ep * (em + ep));
            const double cm = -v * ep / (em * (em + ep));
            if (up + cp >= 0.0 && lo + cm >= 0.0) {
                up += cp;
                lo += cm;
                centred = true;
            }
        }
        if (!centred) {
            if (v > 0.0) up += v / ep;
            else if (v < 0.0) lo += -v / em;
        }
        A.lower[i] = lo;
        A.upper[i] = up;
        // Rows annihilate constants (the centred weights sum to zero as well).
        A.diag[i] = -(lo + up);
    }
    return A;
}

Tridiagonal assemble_spatial_operator(const ProblemSpec& spec, const Grid& grid, double t,
                                      DriftScheme drift) {
    return assemble_spatial_operator(spec.schedule(), spec.regularization_level, grid, t, drift);
}

namespace {

std::vector<double> theta_step(const CoefficientSchedule& schedule, std::optional<int> reg,
                               const Grid& grid, std::span<const double> u, double t, double dt,
                               double theta, DriftScheme drift) {
    const std::size_t n = grid.size();
    std::vector<double> rhs(u.begin(), u.end());
    if (theta < 1.0) {
        const Tridiagonal A0 = assemble_spatial_operator(schedule, reg, grid, t, drift);
        const std::vector<double> Au = A0.apply(u);
        const double c = (1.0 - theta) * dt;
        for (std::size_t i = 0; i < n; ++i) rhs[i] += c * Au[i];
    }
    rhs.front() = 0.0;
    rhs.back() = 0.0;
    if (theta == 0.0) return rhs;

    Tridiagonal B = assemble_spatial_operator(schedule, reg, grid, t + dt, drift);
    const double c = theta * dt;
    for (std::size_t i = 0; i < n; ++i) {
        B.lower[i] *= -c;
        B.upper[i] *= -c;
        B.diag[i] = 1.0 - c * B.diag[i];
    }
    B.lower.front() = B.upper.front() = 0.0;
    B.lower.back() = B.upper.back() = 0.0;
    B.diag.front() = B.diag.back() = 1.0;
    std::vector<double> out = B.solve(rhs);
    out.front() = 0.0;
    out.back() = 0.0;
    return out;
}

// Fractional-step theta scheme: sub-lengths th, 1-2th, th with implicit
// weights a, b, a, where th = 1 - 1/sqrt(2), a = (1-2th)/(1-th), b = 1-a.
std::vector<double> fractional_step(const CoefficientSchedule& schedule, std::optional<int> reg,
                                    const Grid& grid, std::span<const double> u, double t,
                                    double dt, DriftScheme drift) {
    const double th = 1.0 - std::numbers::sqrt2 / 2.0;
    const double a = (1.0 - 2.0 * th) / (1.0 - th);
    std::vector<double> v = theta_step(schedule, reg, grid, u, t, th * dt, a, drift);
    v = theta_step(schedule, reg, grid, v, t + th * dt, (1.0 - 2.0 * th) * dt, 1.0 - a, drift);
    return theta_step(schedule, reg, grid, v, t + (1.0 - th) * dt, th * dt, a, drift);
}

void check_state(const Grid& grid, std::span<const double> state) {
    if (state.size() != grid.size()) throw InvalidArgument(kModule, "state size does not match grid");
}

}  // namespace

std::vector<double> step(const ProblemSpec& spec, const Grid& grid, std::span<const double> state,
                         double t, double dt, double theta, DriftScheme drift) {
    check_state(grid, state);
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument(kModule, "theta must lie in [0, 1]");
    if (!(dt > 0.0)) throw InvalidArgument(kModule, "dt must be positive");
    return theta_step(spec.schedule(), spec.regularization_level, grid, state, t, dt, theta, drift);
}

// ---------------------------------------------------------------- norms

double sup_norm(std::span<const double> values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double l2_norm(const Grid& grid, std::span<const double> values) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) s += values[i] * values[i] * grid.control_width(i);
    return std::sqrt(s);
}

double dirichlet_energy(const Grid& grid, std::span<const double> values) {
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        const double d = values[j + 1] - values[j];
        s += d * d / grid.edge(j);
    }
    return s;
}

// ---------------------------------------------------------------- trajectory

Trajectory::Trajectory(Grid grid, double alpha, double diffusion, BoundaryLaw law)
    : grid_(std::move(grid)), alpha_(alpha), diffusion_(diffusion), law_(law) {}

void Trajectory::append(double t, std::vector<double> values) {
    if (values.size() != grid_.size()) throw InvalidArgument(kModule, "snapshot size mismatch");
    if (!snapshots_.empty() && !(t > snapshots_.back().t))
        throw InvalidArgument(kModule, "snapshot times must increase strictly");
    Snapshot s;
    s.t = t;
    s.length = law_.length(t);
    s.sup_norm = sup_norm(values);
    s.l2_norm = l2_norm(grid_, values);
    const auto K = WeightFunction::critical_stretched(alpha_, law_.k, law_.L0, diffusion_);
    double wsum = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i)
        wsum += K.value(grid_.node(i)) * values[i] * values[i] * grid_.control_width(i);
    s.weighted_l2 = std::sqrt(wsum);
    s.values = std::move(values);
    snapshots_.push_back(std::move(s));
}

double Trajectory::physical_value(std::size_t i, double xi) const {
    const Snapshot& s = at(i);
    const double x = xi / s.length;
    if (x < 0.0 || x > 1.0) throw InvalidArgument(kModule, "point outside the physical domain");
    return grid_.interpolate(s.values, x);
}

double Trajectory::physical_l2(std::size_t i) const {
    const Snapshot& s = at(i);
    return std::sqrt(s.length) * s.l2_norm;
}

std::vector<double> Trajectory::times() const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& s : snapshots_) out.push_back(s.t);
    return out;
}

std::vector<double> Trajectory::sup_norms() const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& s : snapshots_) out.push_back(s.sup_norm);
    return out;
}

std::vector<double> Trajectory::l2_norms() const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& s : snapshots_) out.push_back(s.l2_norm);
    return out;
}

// ---------------------------------------------------------------- integration

namespace {

Trajectory integrate(const ProblemSpec& spec, const CoefficientSchedule& schedule, const Grid& grid,
                     std::span<const double> times, const IntegrationOptions& opt) {
    spec.validate();
    if (times.empty() || times.front() != 0.0)
        throw InvalidArgument(kModule, "time points must start at 0");
    for (std::size_t j = 1; j < times.size(); ++j)
        if (!(times[j] > times[j - 1])) throw InvalidArgument(kModule, "time points must increase");
    if (!(opt.theta >= 0.0 && opt.theta <= 1.0))
        throw InvalidArgument(kModule, "theta must lie in [0, 1]");

    std::vector<double> u(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) u[i] = spec.initial(grid.node(i));
    u.front() = 0.0;
    u.back() = 0.0;

    Trajectory traj(grid, spec.alpha, spec.diffusion, spec.law);
    traj.append(0.0, u);
    if (sup_norm(u) == 0.0) {
        for (std::size_t j = 1; j < times.size(); ++j) traj.append(times[j], u);
        return traj;
    }

    const bool adaptive = opt.max_log_decrement > 0.0;
    const auto reg = spec.regularization_level;
    double t = 0.0;
    double dt = times.size() > 1 ? (times[1] - times[0]) / 16.0 : 0.0;
    const bool fractional = opt.scheme == TimeScheme::fractional_theta;
    int startup_left = !fractional && opt.theta < 1.0 ? opt.startup_steps : 0;
    auto advance = [&](std::span<const double> state, double t_at, double h, double th) {
        return fractional ? fractional_step(schedule, reg, grid, state, t_at, h, opt.drift)
                          : theta_step(schedule, reg, grid, state, t_at, h, th, opt.drift);
    };
    std::size_t substeps = 0;

    for (std::size_t j = 1; j < times.size(); ++j) {
        const double target = times[j];
        if (!adaptive) {
            const double h = target - t;
            if (startup_left > 0) {
                // Split the first interval into backward-Euler pieces.
                const double piece = h / (2.0 * startup_left);
                for (int s = 0; s < 2 * startup_left; ++s)
                    u = advance(u, t + s * piece, piece, 1.0);
                startup_left = 0;
            } else {
                u = advance(u, t, h, opt.theta);
            }
            t = target;
        } else {
            while (t < target) {
                if (++substeps > opt.max_substeps)
                    throw NumericalFailure(kModule, "substep budget exhausted");
                double h = std::min(dt, target - t);
                const bool last = h >= target - t;
                const double th = startup_left > 0 ? 1.0 : opt.theta;
                const double before = sup_norm(u);
                std::vector<double> next = advance(u, t, h, th);
                const double after = sup_norm(next);
                const double dec = (before > 0.0 && after > 0.0) ? std::abs(std::log(before / after)) : 0.0;
                if (dec > 2.0 * opt.max_log_decrement && h > 1e-14 * (1.0 + t)) {
                    dt = h * std::max(0.1, opt.max_log_decrement / dec);
                    continue;
                }
                u = std::move(next);
                t = last ? target : t + h;
                if (startup_left > 0) --startup_left;
                const double ratio = dec > 0.0 ? opt.max_log_decrement / dec : opt.max_growth;
                // Only the step taken to reach an output may be artificially short.
                const double basis = last && h < dt ? dt : h;
                dt = basis * std::clamp(ratio, 0.5, opt.max_growth);
            }
        }
        traj.append(target, u);
        if (traj.snapshots().back().sup_norm < opt.norm_floor) {
            if (j + 1 < times.size()) traj.mark_truncated();
            break;
        }
    }
    return traj;
}

}  // namespace

Trajectory solve_moving(const ProblemSpec& spec, const Grid& grid, std::span<const double> times,
                        const IntegrationOptions& options) {
    return integrate(spec, spec.schedule(), grid, times, options);
}

Trajectory solve_fixed(const ProblemSpec& spec, const Grid& grid, std::span<const double> times,
                       const IntegrationOptions& options) {
    ProblemSpec frozen = spec;
    frozen.law.gamma = 0.0;
    return integrate(frozen, frozen_coefficients(spec.law.L0, spec.alpha, spec.diffusion), grid,
                     times, options);
}

std::vector<double> geometric_times(double k, double t_max, std::size_t intervals) {
    if (!(k > 0.0) || !(t_max > 0.0) || intervals == 0)
        throw InvalidArgument(kModule, "geometric grid needs k > 0, t_max > 0, M >= 1");
    std::vector<double> t(intervals + 1);
    const double L = std::log1p(k * t_max);
    t[0] = 0.0;
    for (std::size_t j = 1; j < intervals; ++j)
        t[j] = std::expm1(L * static_cast<double>(j) / static_cast<double>(intervals)) / k;
    t[intervals] = t_max;
    return t;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,l_t,sup_norm,l2_norm,weighted_l2\n";
    for (const auto& s : traj.snapshots())
        write_csv_row(out, {format_real(s.t), format_real(s.length), format_real(s.sup_norm),
                            format_real(s.l2_norm), format_real(s.weighted_l2)});
}

}  // namespace ncdecay
