#include "ncdecay/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>

#include "ncdecay/csv.hpp"
#include "ncdecay/error.hpp"
#include "ncdecay/geometry.hpp"
#include "ncdecay/solver.hpp"

namespace ncdecay {

namespace {

constexpr const char* kModule = "spectral";

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(kModule, std::string(what) + " must be positive");
}

}  // namespace

std::string to_string(EigenKind kind) {
    switch (kind) {
        case EigenKind::selfsimilar: return "selfsimilar";
        case EigenKind::degenerate_critical: return "degenerate-critical";
        case EigenKind::custom: return "custom";
    }
    return "?";
}

EigenProblem EigenProblem::selfsimilar(double a, double k, double L0) {
    require_positive(a, "a");
    require_positive(k, "k");
    require_positive(L0, "L0");
    EigenProblem p;
    p.kind_ = EigenKind::selfsimilar;
    p.a_ = a;
    p.k_ = k;
    p.L0_ = L0;
    p.c_ = a / (k * L0 * L0);
    const auto w = WeightFunction::selfsimilar_gaussian(a, k, L0);
    p.K_ = [w](double x) { return w.value(x); };
    return p;
}

EigenProblem EigenProblem::degenerate_critical(double alpha, double k, double L0, double a) {
    require_weak_degeneracy(alpha, kModule);
    require_positive(a, "a");
    require_positive(k, "k");
    require_positive(L0, "L0");
    EigenProblem p;
    p.kind_ = EigenKind::degenerate_critical;
    p.alpha_ = alpha;
    p.a_ = a;
    p.k_ = k;
    p.L0_ = L0;
    p.c_ = a * std::pow(L0, alpha - 2.0);
    const auto w = WeightFunction::critical_stretched(alpha, k, L0, a);
    p.K_ = [w](double x) { return w.value(x); };
    return p;
}

EigenProblem EigenProblem::custom(double alpha, double prefactor, std::function<double(double)> K) {
    require_weak_degeneracy(alpha, kModule);
    require_positive(prefactor, "prefactor");
    if (!K) throw InvalidArgument(kModule, "weight K missing");
    EigenProblem p;
    p.kind_ = EigenKind::custom;
    p.alpha_ = alpha;
    p.c_ = prefactor;
    p.K_ = std::move(K);
    return p;
}

double EigenProblem::P(double x) const {
    return c_ * (alpha_ == 0.0 ? 1.0 : std::pow(x, alpha_)) * K_(x);
}

double EigenProblem::decay_power(double eigenvalue) const {
    switch (kind_) {
        case EigenKind::selfsimilar: return eigenvalue;
        case EigenKind::degenerate_critical: return eigenvalue / k_;
        case EigenKind::custom: break;
    }
    throw InvalidArgument(kModule, "custom eigenproblems carry no decay law");
}

// ---------------------------------------------------------------- pencil

Pencil assemble_pencil(const EigenProblem& problem, const Grid& grid) {
    const std::size_t N = grid.cells();
    if (N < 2) throw InvalidArgument(kModule, "grid needs at least two cells");
    const std::size_t n = N - 1;
    std::vector<double> g(N), kmid(N);
    for (std::size_t j = 0; j < N; ++j) {
        kmid[j] = problem.K(grid.face(j));
        g[j] = problem.prefactor() * kmid[j] *
               face_coefficient(problem.alpha(), grid.node(j), grid.node(j + 1)) / grid.edge(j);
    }
    Pencil P;
    P.s_diag.resize(n);
    P.m_diag.resize(n);
    P.s_off.resize(n - 1);
    P.m_off.resize(n - 1);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = r + 1;
        P.s_diag[r] = g[i - 1] + g[i];
        const double lumped = problem.K(grid.node(i)) * grid.control_width(i);
        const double consistent = (kmid[i - 1] * grid.edge(i - 1) + kmid[i] * grid.edge(i)) / 3.0;
        P.m_diag[r] = 0.5 * (lumped + consistent);
        if (r + 1 < n) {
            P.s_off[r] = -g[i];
            P.m_off[r] = 0.5 * kmid[i] * grid.edge(i) / 6.0;
        }
    }
    return P;
}

namespace {

double bilinear(const std::vector<double>& d, const std::vector<double>& o,
                std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    const std::size_t n = d.size();
    for (std::size_t r = 0; r < n; ++r) {
        s += d[r] * u[r] * v[r];
        if (r + 1 < n) s += o[r] * (u[r] * v[r + 1] + u[r + 1] * v[r]);
    }
    return s;
}

std::vector<double> multiply(const std::vector<double>& d, const std::vector<double>& o,
                             std::span<const double> u) {
    const std::size_t n = d.size();
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        y[r] = d[r] * u[r];
        if (r > 0) y[r] += o[r - 1] * u[r - 1];
        if (r + 1 < n) y[r] += o[r] * u[r + 1];
    }
    return y;
}

// Number of eigenvalues of the pencil strictly below x (inertia of S - x M).
std::size_t sturm_count(const Pencil& P, double x) {
    const std::size_t n = P.s_diag.size();
    std::size_t neg = 0;
    double d = 0.0;
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    for (std::size_t r = 0; r < n; ++r) {
        double a = P.s_diag[r] - x * P.m_diag[r];
        if (r > 0) {
            const double b = P.s_off[r - 1] - x * P.m_off[r - 1];
            a -= b * b / d;
        }
        if (a == 0.0) a = -tiny;
        if (a < 0.0) ++neg;
        d = a;
    }
    return neg;
}

std::vector<double> inverse_iteration(const Pencil& P, double sigma, std::uint64_t seed) {
    const std::size_t n = P.s_diag.size();
    std::vector<double> x(n);
    std::uint64_t s = seed;
    for (auto& v : x) {
        // splitmix64, mapped to [0.5, 1.5)
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        v = 0.5 + static_cast<double>(z >> 11) * 0x1.0p-53;
    }
    for (int it = 0; it < 4; ++it) {
        std::vector<double> dl(n - 1), du(n - 1), d(n);
        for (std::size_t r = 0; r < n; ++r) {
            d[r] = P.s_diag[r] - sigma * P.m_diag[r];
            if (r + 1 < n) dl[r] = du[r] = P.s_off[r] - sigma * P.m_off[r];
        }
        std::vector<double> b = multiply(P.m_diag, P.m_off, x);
        lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(n), 1, dl.data(),
                                        d.data(), du.data(), b.data(), static_cast<lapack_int>(n));
        if (info > 0) {
            // Exactly singular shift: nudge it off the eigenvalue.
            sigma *= 1.0 + 8.0 * std::numeric_limits<double>::epsilon();
            continue;
        }
        if (info < 0) throw NumericalFailure(kModule, "dgtsv rejected its arguments");
        double mx = 0.0;
        for (double v : b) mx = std::max(mx, std::abs(v));
        if (!(mx > 0.0) || !std::isfinite(mx)) throw NumericalFailure(kModule, "inverse iteration broke down");
        for (std::size_t r = 0; r < n; ++r) x[r] = b[r] / mx;
    }
    return x;
}

}  // namespace

double inner_K(const Pencil& P, std::span<const double> u, std::span<const double> v) {
    return bilinear(P.m_diag, P.m_off, u.subspan(1, u.size() - 2), v.subspan(1, v.size() - 2));
}

double inner_H(const Pencil& P, std::span<const double> u, std::span<const double> v) {
    return bilinear(P.s_diag, P.s_off, u.subspan(1, u.size() - 2), v.subspan(1, v.size() - 2));
}

std::vector<EigenPair> solve_eigen(const EigenProblem& problem, const Grid& grid, int m) {
    if (m < 1) throw InvalidArgument(kModule, "requested eigenpair count must be >= 1");
    const std::size_t N = grid.cells();
    if (static_cast<std::size_t>(m) > N - 1)
        throw InvalidArgument(kModule, "more eigenpairs requested than interior nodes");
    if (static_cast<std::size_t>(m) * 4 > N)
        std::cerr << "warning: " << m << " eigenpairs exceed the resolvable count N/4 = " << N / 4
                  << '\n';

    const Pencil P = assemble_pencil(problem, grid);
    const auto um = static_cast<std::size_t>(m);

    double hi = 1.0;
    while (sturm_count(P, hi) < um) {
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericalFailure(kModule, "no upper bracket for the spectrum");
    }

    std::vector<EigenPair> out;
    std::vector<std::vector<double>> basis;
    double lo_prev = 0.0;
    for (std::size_t n = 1; n <= um; ++n) {
        double lo = lo_prev, up = hi;
        for (int it = 0; it < 200 && up - lo > 4.0 * std::numeric_limits<double>::epsilon() * up; ++it) {
            const double mid = 0.5 * (lo + up);
            if (sturm_count(P, mid) >= n) up = mid;
            else lo = mid;
        }
        const double lambda = 0.5 * (lo + up);
        lo_prev = lo;

        std::vector<double> x = inverse_iteration(P, lambda, 0x5eedULL + n);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                const double c = bilinear(P.m_diag, P.m_off, x, b);
                for (std::size_t r = 0; r < x.size(); ++r) x[r] -= c * b[r];
            }
        const double nrm = std::sqrt(bilinear(P.m_diag, P.m_off, x, x));
        if (!(nrm > 0.0)) throw NumericalFailure(kModule, "eigenvector collapsed during orthogonalisation");
        const double sign = x.front() < 0.0 ? -1.0 : 1.0;
        for (auto& v : x) v *= sign / nrm;

        const auto Sx = multiply(P.s_diag, P.s_off, x);
        const auto Mx = multiply(P.m_diag, P.m_off, x);
        double res = 0.0, ref = 0.0;
        for (std::size_t r = 0; r < x.size(); ++r) {
            res = std::max(res, std::abs(Sx[r] - lambda * Mx[r]));
            ref = std::max(ref, std::abs(Sx[r]));
        }
        if (!(res <= 1e-7 * ref))
            throw NumericalFailure(kModule, "eigenpair " + std::to_string(n) + " did not converge");

        EigenPair e;
        e.kind = problem.kind();
        e.index = static_cast<int>(n);
        e.eigenvalue = lambda;
        e.values.assign(grid.size(), 0.0);
        std::copy(x.begin(), x.end(), e.values.begin() + 1);
        e.weighted_norm = std::sqrt(bilinear(P.m_diag, P.m_off, x, x));
        e.sup_norm = sup_norm(e.values);
        e.l2_norm = l2_norm(grid, e.values);
        basis.push_back(std::move(x));
        out.push_back(std::move(e));
    }
    return out;
}

double rayleigh_quotient(const EigenProblem& problem, const Grid& grid, std::span<const double> u) {
    if (u.size() != grid.size()) throw InvalidArgument(kModule, "function size does not match grid");
    if (u.front() != 0.0 || u.back() != 0.0)
        throw InvalidArgument(kModule, "function must vanish at both endpoints");
    const Pencil P = assemble_pencil(problem, grid);
    const double den = inner_K(P, u, u);
    if (!(den > 0.0)) throw InvalidArgument(kModule, "Rayleigh quotient of the zero function");
    return inner_H(P, u, u) / den;
}

SeparableSnapshot separable_solution(const EigenProblem& problem, const EigenPair& pair,
                                     const Grid& grid, double t) {
    if (!(t >= 0.0)) throw InvalidArgument(kModule, "time must be nonnegative");
    if (pair.values.size() != grid.size()) throw InvalidArgument(kModule, "eigenpair/grid mismatch");
    SeparableSnapshot s;
    s.t = t;
    const double lg = std::log1p(problem.k() * t);
    s.factor = std::exp(-problem.decay_power(pair.eigenvalue) * lg);
    const double gamma = problem.kind() == EigenKind::selfsimilar ? 0.5 : gamma_critical(problem.alpha());
    s.length = problem.L0() * std::exp(gamma * lg);
    s.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) s.values[i] = s.factor * pair.values[i];
    s.sup_norm = s.factor * pair.sup_norm;
    s.l2_norm = s.factor * pair.l2_norm;
    s.weighted_norm = s.factor * pair.weighted_norm;
    return s;
}

void write_eigenpairs_csv(std::ostream& out, std::span<const EigenPair> pairs) {
    out << "kind,n,eigenvalue,weighted_norm,sup_norm\n";
    for (const auto& p : pairs)
        write_csv_row(out, {to_string(p.kind), std::to_string(p.index), format_real(p.eigenvalue),
                            format_real(p.weighted_norm), format_real(p.sup_norm)});
}

void write_eigenfunction_csv(std::ostream& out, const Grid& grid, const EigenPair& pair) {
    out << "x,phi\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        write_csv_row(out, {format_real(grid.node(i)), format_real(pair.values.at(i))});
}

}  // namespace ncdecay
