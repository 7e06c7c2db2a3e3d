#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ncdecay/error.hpp"
#include "ncdecay/harness.hpp"
#include "ncdecay/oracles.hpp"
#include "ncdecay/solver.hpp"

using namespace ncdecay;
using doctest::Approx;
constexpr double pi = std::numbers::pi;

namespace {

ProblemSpec make_spec(double alpha, double a, double L0, double k, double gamma,
                      InitialDatum init = InitialDatum::sine()) {
    ProblemSpec s;
    s.alpha = alpha;
    s.diffusion = a;
    s.law = BoundaryLaw::make(L0, k, gamma);
    s.initial = std::move(init);
    return s;
}

double sine(double x) { return std::sin(pi * x); }

}  // namespace

TEST_CASE("laplacian limit of the assembled operator") {
    const Grid g = Grid::uniform(16);
    const auto A = assemble_spatial_operator(make_spec(0, 1, 1, 1, 0), g, 0.0);
    const double h2 = 1.0 / (16.0 * 16.0);
    for (std::size_t i = 1; i < 16; ++i) {
        CHECK(A.lower[i] * h2 == Approx(1.0).epsilon(1e-13));
        CHECK(A.diag[i] * h2 == Approx(-2.0).epsilon(1e-13));
        CHECK(A.upper[i] * h2 == Approx(1.0).epsilon(1e-13));
    }
    CHECK(A.diag[0] == 0.0);
    CHECK(A.upper[0] == 0.0);
    CHECK(A.diag[16] == 0.0);
    CHECK(A.lower[16] == 0.0);
}

TEST_CASE("interior rows conserve constants without drift") {
    for (const Grid& g : {Grid::uniform(40), Grid::for_alpha(40, 0.5), Grid::graded(33, 2.7)}) {
        const auto A = assemble_spatial_operator(make_spec(0.5, 1, 1, 1, 0), g, 0.0);
        for (std::size_t i = 1; i + 1 < g.size(); ++i)
            CHECK(std::abs(A.lower[i] + A.diag[i] + A.upper[i]) <= 1e-12 * std::abs(A.diag[i]));
    }
}

TEST_CASE("operator rows match an independent assembly") {
    // law (1, 1, 1) at t = 0 gives p = 1, q = -1.
    const auto spec = make_spec(0.5, 1, 1, 1, 1);
    std::mt19937_64 rng(64);
    for (const Grid& g : {Grid::uniform(64), Grid::for_alpha(64, 0.5)}) {
        const auto A = assemble_spatial_operator(spec, g, 0.0, DriftScheme::upwind);
        const std::vector<double> nodes(g.nodes().begin(), g.nodes().end());
        std::vector<std::size_t> rows{1, 63};
        for (int r = 0; r < 3; ++r) rows.push_back(std::uniform_int_distribution<std::size_t>(2, 62)(rng));
        for (std::size_t i : rows) {
            const auto ref = oracle::hand_assembled_row(nodes, i, 0.5, 1.0, -1.0);
            CHECK(A.lower[i] == Approx(ref[0]).epsilon(1e-12));
            CHECK(A.diag[i] == Approx(ref[1]).epsilon(1e-12));
            CHECK(A.upper[i] == Approx(ref[2]).epsilon(1e-12));
        }
    }
}

TEST_CASE("regularized rows match an independent assembly") {
    const auto spec = regularize(make_spec(0.5, 1, 1, 1, 1), 10);
    const Grid g = Grid::for_alpha(64, 0.5);
    const auto A = assemble_spatial_operator(spec, g, 0.0, DriftScheme::upwind);
    const std::vector<double> nodes(g.nodes().begin(), g.nodes().end());
    for (std::size_t i : {1ul, 20ul, 63ul}) {
        const auto ref = oracle::hand_assembled_row(nodes, i, 0.5, 1.0, -1.0, 3.0 / 20.0);
        CHECK(A.lower[i] == Approx(ref[0]).epsilon(1e-12));
        CHECK(A.diag[i] == Approx(ref[1]).epsilon(1e-12));
        CHECK(A.upper[i] == Approx(ref[2]).epsilon(1e-12));
    }
}

TEST_CASE("face coefficient is the two-point mean of x^alpha") {
    CHECK(face_coefficient(0.0, 0.2, 0.3) == 1.0);
    CHECK(face_coefficient(0.5, 0.0, 0.01) > 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 50; ++i) {
        const double alpha = 0.99 * u(rng), a = 0.5 * u(rng) * u(rng), b = a + 1e-4 + 0.1 * u(rng);
        const double inv = oracle::integrate_singular([&](double x) { return std::pow(x, -alpha); }, a, b);
        CHECK(face_coefficient(alpha, a, b) == Approx((b - a) / inv).epsilon(1e-10));
    }
    CHECK_THROWS_AS(face_coefficient(0.5, 0.3, 0.2), InvalidArgument);
}

TEST_CASE("both drift schemes give M-matrix rows") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto spec = make_spec(0.95 * u(rng), 0.1 + 3 * u(rng), 0.3 + 2 * u(rng), 0.1 + 3 * u(rng), -3 + 6 * u(rng));
        const Grid g = Grid::graded(10 + trial, 1 + 2 * u(rng));
        for (auto drift : {DriftScheme::upwind, DriftScheme::hybrid}) {
            const auto A = assemble_spatial_operator(spec, g, 10 * u(rng), drift);
            for (std::size_t i = 1; i + 1 < g.size(); ++i) {
                CHECK(A.lower[i] >= 0.0);
                CHECK(A.upper[i] >= 0.0);
                CHECK(A.diag[i] <= 0.0);
                CHECK(std::abs(A.lower[i] + A.diag[i] + A.upper[i]) <= 1e-10 * std::abs(A.diag[i]) + 1e-300);
            }
        }
    }
}

TEST_CASE("step keeps the zero state") {
    const auto spec = make_spec(0.5, 1, 1, 1, 2.0 / 3);
    const Grid g = Grid::for_alpha(32, 0.5);
    const std::vector<double> zero(g.size(), 0.0);
    for (double theta : {0.0, 0.5, 1.0}) {
        const auto next = step(spec, g, zero, 0.3, 0.1, theta);
        for (double v : next) CHECK(v == 0.0);
    }
}

TEST_CASE("step rejects bad arguments") {
    const auto spec = make_spec(0, 1, 1, 1, 0);
    const Grid g = Grid::uniform(8);
    const std::vector<double> u(g.size(), 0.0);
    CHECK_THROWS_AS(step(spec, g, u, 0, -0.1, 1.0), InvalidArgument);
    CHECK_THROWS_AS(step(spec, g, u, 0, 0.1, 1.5), InvalidArgument);
}

namespace {

// L-infinity error of a non-adaptive frozen sine run with a uniform step.
double frozen_sine_error(std::size_t cells, double dt, double theta, double T, double a = 1.0, double L0 = 1.0) {
    const auto spec = make_spec(0, a, L0, 1, 0);
    const Grid g = Grid::uniform(cells);
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    std::vector<double> times(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) times[j] = T * static_cast<double>(j) / static_cast<double>(steps);
    IntegrationOptions io;
    io.theta = theta;
    io.drift = DriftScheme::upwind;
    io.max_log_decrement = 0.0;
    io.startup_steps = 0;
    const auto tr = solve_fixed(spec, g, times, io);
    const auto& last = tr.at(tr.size() - 1);
    const double decay = std::exp(-a * pi * pi * T / (L0 * L0));
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(last.values[i] - decay * sine(g.node(i))));
    return err;
}

}  // namespace

TEST_CASE("frozen sine: backward Euler is first order in time") {
    const double e1 = frozen_sine_error(400, 0.01, 1.0, 0.2);
    const double e2 = frozen_sine_error(400, 0.005, 1.0, 0.2);
    CHECK(std::log2(e1 / e2) == Approx(1.0).epsilon(0.1));
}

TEST_CASE("frozen sine: Crank-Nicolson is second order with dt proportional to dx") {
    double prev = 0.0;
    for (std::size_t n : {64, 128, 256}) {
        const double e = frozen_sine_error(n, 0.5 / static_cast<double>(n), 0.5, 0.1, 1.3, 1.2);
        if (prev > 0.0) {
            const double order = std::log2(prev / e);
            CHECK(order >= 1.8);
            CHECK(order <= 2.2);
        }
        prev = e;
    }
}

TEST_CASE("frozen moving run equals the fixed-domain run bitwise") {
    for (double alpha : {0.0, 0.4}) {
        const auto spec = make_spec(alpha, 0.7, 1.3, 2.0, 0.0, InitialDatum::bump(0.4, 0.3));
        const Grid g = Grid::for_alpha(50, alpha);
        const auto times = geometric_times(2.0, 5.0, 20);
        for (auto scheme : {TimeScheme::theta, TimeScheme::fractional_theta}) {
            IntegrationOptions io;
            io.scheme = scheme;
            const auto a = solve_moving(spec, g, times, io);
            const auto b = solve_fixed(spec, g, times, io);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.at(i).values == b.at(i).values);
        }
    }
}

TEST_CASE("trajectory invariants and the physical wrapper") {
    const auto spec = make_spec(0.3, 1, 1.5, 1, 0.8, InitialDatum::sine(2));
    const Grid g = Grid::for_alpha(64, 0.3);
    const auto times = geometric_times(1.0, 20.0, 30);
    const auto tr = solve_moving(spec, g, times);
    REQUIRE(tr.size() == times.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto& s = tr.at(i);
        if (i > 0) CHECK(s.t > tr.at(i - 1).t);
        CHECK(s.values.front() == 0.0);
        CHECK(s.values.back() == 0.0);
        CHECK(s.length == Approx(spec.law.length(s.t)));
        CHECK(s.sup_norm == sup_norm(s.values));
        // sup over the physical domain equals the reference sup (sampled at the nodes).
        double phys = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) phys = std::max(phys, std::abs(tr.physical_value(i, s.length * g.node(j))));
        CHECK(phys == Approx(s.sup_norm).epsilon(1e-14));
        CHECK(tr.physical_l2(i) == Approx(std::sqrt(s.length) * l2_norm(g, s.values)));
    }
    CHECK_THROWS_AS(tr.physical_value(0, 2.0 * spec.law.L0), InvalidArgument);
}

TEST_CASE("solver input validation") {
    const Grid g = Grid::uniform(16);
    const auto times = geometric_times(1, 1, 4);
    CHECK_THROWS_AS(solve_moving(make_spec(1.0, 1, 1, 1, 0), g, times), InvalidArgument);
    CHECK_THROWS_AS(solve_moving(make_spec(0, 1, 1, 1, 0, InitialDatum::reference([](double) { return 1.0; })), g, times),
                    InvalidArgument);
    const std::vector<double> bad{0.1, 0.2};
    CHECK_THROWS_AS(solve_moving(make_spec(0, 1, 1, 1, 0), g, bad), InvalidArgument);
    const std::vector<double> back{0.0, 0.2, 0.1};
    CHECK_THROWS_AS(solve_moving(make_spec(0, 1, 1, 1, 0), g, back), InvalidArgument);
    CHECK_THROWS_AS(make_spec(0, -1, 1, 1, 0).validate(), InvalidArgument);
}

TEST_CASE("zero datum gives zero snapshots") {
    const auto spec = make_spec(0, 1, 1, 1, 0.5, InitialDatum::reference([](double) { return 0.0; }));
    const auto tr = solve_moving(spec, Grid::uniform(16), geometric_times(1, 10, 5));
    REQUIRE(tr.size() == 6);
    for (const auto& s : tr.snapshots()) CHECK(s.sup_norm == 0.0);
}

TEST_CASE("backward Euler keeps the maximum principle and the order of data") {
    const auto mp = harness::verify_max_principle(101, 100);
    CHECK(mp.passed());
    const auto cp = harness::verify_comparison(202, 100);
    CHECK(cp.passed());
}

TEST_CASE("regularization band and limit") {
    for (int n : {1, 7, 100, 5000})
        for (double xa : {0.0, 0.3, 1.0}) {
            CHECK(xa + 1.0 / n <= xa + 1.5 / n);
            CHECK(xa + 1.5 / n <= xa + 2.0 / n);
        }
    const auto base = make_spec(0.5, 1, 1, 1, 0.5);
    const Grid g = Grid::for_alpha(40, 0.5);
    const auto A = assemble_spatial_operator(base, g, 1.0);
    double prev = INFINITY;
    for (int n : {10, 100, 1000, 100000}) {
        const auto B = assemble_spatial_operator(regularize(base, n), g, 1.0);
        double diff = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (A.diag[i] != 0.0) diff = std::max(diff, std::abs(A.diag[i] - B.diag[i]) / std::abs(A.diag[i]));
        CHECK(diff < prev);
        prev = diff;
    }
    CHECK(prev < 1e-2);  // O(1/n) in the first cell
    CHECK_THROWS_AS(regularize(make_spec(0, 1, 1, 1, 0), 10), InvalidArgument);
    CHECK_THROWS_AS(regularize(base, 0), InvalidArgument);
}

TEST_CASE("regularized solutions approach the degenerate one") {
    const auto base = make_spec(0.5, 1, 1, 1, 0.5);
    const Grid g = Grid::for_alpha(128, 0.5);
    const auto times = geometric_times(1, 1.0, 10);
    const auto ref = solve_moving(base, g, times);
    double prev = INFINITY;
    for (int n : {10, 100, 1000}) {
        const auto tr = solve_moving(regularize(base, n), g, times);
        double diff = 0.0;
        for (std::size_t i = 0; i < tr.size(); ++i) diff = std::max(diff, std::abs(tr.at(i).sup_norm - ref.at(i).sup_norm));
        CHECK(diff < prev);
        prev = diff;
    }
}

TEST_CASE("heat kernel: Gaussian datum") {
    const double c = 1.3, m = 0.8, s = 0.15, a = 0.7;
    auto z0 = [&](double v) { return c * std::exp(-(v - m) * (v - m) / (2 * s * s)); };
    for (double t : {0.01, 0.1, 1.0})
        for (double x : {-0.5, 0.3, 0.8, 1.7}) {
            const double ref = oracle::gaussian_heat_solution(c, m, s, a, x, t);
            // Truncating the datum at 12 standard deviations is far below the tolerance.
            CHECK(heat_kernel_solution(z0, m - 12 * s, m + 12 * s, a, x, t) == Approx(ref).epsilon(1e-8));
        }
}

TEST_CASE("heat kernel: sup bound and mass") {
    auto z0 = [](double v) { return v < 1.0 ? 1.0 : 2.0 - v; };  // trapezoid on (0, 2)
    const double l1 = comparison_datum_l1(1.0, 1.0);
    CHECK(l1 == Approx(1.5));
    for (double t : {0.05, 0.5, 5.0}) {
        double sup = 0.0;
        for (double x = -1; x <= 3; x += 0.01) sup = std::max(sup, heat_kernel_solution(z0, 0, 2, 1.0, x, t));
        CHECK(sup <= heat_kernel_sup_bound(l1, 1.0, t));
        const double w = 12 * std::sqrt(4 * t);
        const double mass = oracle::integrate([&](double x) { return heat_kernel_solution(z0, 0, 2, 1.0, x, t); },
                                              -w, 2 + w, 1e-10);
        CHECK(mass == Approx(1.5).epsilon(1e-8));
    }
    CHECK(heat_kernel_sup_bound(2.0, 1.0, 1.0) == Approx(2.0 / std::sqrt(4 * pi)));
}

TEST_CASE("trajectory CSV") {
    const auto spec = make_spec(0, 1, 1, 1, 0.5);
    const auto tr = solve_moving(spec, Grid::uniform(16), geometric_times(1, 1, 3));
    std::ostringstream o;
    write_trajectory_csv(o, tr);
    std::istringstream in(o.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,l_t,sup_norm,l2_norm,weighted_l2");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream ls(line);
        std::string t, l;
        std::getline(ls, t, ',');
        std::getline(ls, l, ',');
        CHECK(std::stod(t) == tr.at(rows - 1).t);  // round-trip formatting
        CHECK(std::stod(l) == tr.at(rows - 1).length);
    }
    CHECK(rows == 4);
    CHECK(o.str().find('\r') == std::string::npos);
}
