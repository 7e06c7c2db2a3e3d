#include <doctest.h>

#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "ncdecay/error.hpp"
#include "ncdecay/harness.hpp"
#include "ncdecay/oracles.hpp"
#include "ncdecay/solver.hpp"
#include "ncdecay/spectral.hpp"

#ifdef NCDECAY_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace ncdecay;
using doctest::Approx;
constexpr double pi = std::numbers::pi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Grid grid_for(const EigenProblem& p, std::size_t n) {
    return p.alpha() == 0.0 ? Grid::uniform(n) : Grid::for_alpha(n, p.alpha());
}

// Random admissible grid function: a few sine modes in x^{1-alpha}, scaled.
std::vector<double> random_admissible(std::mt19937_64& rng, const Grid& g, double alpha) {
    std::normal_distribution<double> n01;
    std::vector<double> c(6);
    for (auto& v : c) v = n01(rng);
    std::vector<double> u(g.size(), 0.0);
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        const double y = std::pow(g.node(i), 1.0 - alpha);
        for (std::size_t j = 0; j < c.size(); ++j) u[i] += c[j] * std::sin(pi * double(j + 1) * y);
    }
    return u;
}

}  // namespace

TEST_CASE("weights of the two problem kinds") {
    const auto ss = EigenProblem::selfsimilar(1.3, 0.7, 1.1);
    for (double x = 0; x <= 1.0; x += 0.05) {
        CHECK(ss.K(x) >= 1.0);
        CHECK(ss.K(x) == Approx(std::exp(0.7 * 1.1 * 1.1 * x * x / (4 * 1.3))).epsilon(1e-14));
    }
    const auto dc = EigenProblem::degenerate_critical(0.5, 1.0, 1.0);
    CHECK(dc.K(0.0) == 1.0);
    CHECK(dc.P(0.0) == 0.0);
    for (double x = 0.1; x <= 1.0; x += 0.1) {
        const double K = std::exp(std::pow(x, 1.5) / (1.5 * 1.5));
        CHECK(dc.K(x) == Approx(K).epsilon(1e-14));
        CHECK(dc.P(x) == Approx(K * std::sqrt(x)).epsilon(1e-14));
    }
}

TEST_CASE("Dirichlet Laplacian limit") {
    const double L0 = 2.0;
    const auto p = EigenProblem::custom(0.0, 1.0 / (L0 * L0), [](double) { return 1.0; });
    const auto pairs = solve_eigen(p, Grid::uniform(2000), 3);
    for (int n = 1; n <= 3; ++n) CHECK(rel(pairs[n - 1].eigenvalue, n * n * pi * pi / (L0 * L0)) <= 1e-6);
}

TEST_CASE("self-similar ground state agrees with shooting") {
    const auto p = EigenProblem::selfsimilar(1, 1, 1);
    const auto pairs = solve_eigen(p, Grid::uniform(2000), 3);
    const auto sl = oracle::selfsimilar_problem(1, 1, 1);
    for (int n = 1; n <= 3; ++n) CHECK(rel(pairs[n - 1].eigenvalue, oracle::shooting_eigenvalue(sl, n, 0.0)) <= 1e-6);
}

TEST_CASE("degenerate critical eigenvalues agree with shooting") {
    for (double alpha : {0.25, 0.5, 0.75}) {
        const auto p = EigenProblem::degenerate_critical(alpha, 1, 1);
        const auto pairs = solve_eigen(p, Grid::for_alpha(2000, alpha), 3);
        const auto sl = oracle::critical_problem(alpha, 1, 1);
        for (int n = 1; n <= 3; ++n)
            CHECK(rel(pairs[n - 1].eigenvalue, oracle::shooting_eigenvalue(sl, n, 1e-3 / 2000)) <= 1e-6);
    }
}

TEST_CASE("degenerate critical ground state matches the variational minimum") {
    const auto p = EigenProblem::degenerate_critical(0.5, 1, 1);
    const double lam = solve_eigen(p, Grid::for_alpha(2000, 0.5), 1)[0].eigenvalue;
    const auto v = oracle::variational_minimum(oracle::critical_problem(0.5, 1, 1), 30);
    CHECK(rel(lam, v.value) <= 1e-4);
}

TEST_CASE("ordering, sign and normalisation") {
    for (const auto& p : {EigenProblem::selfsimilar(1, 1, 1), EigenProblem::selfsimilar(0.3, 2, 1.5),
                          EigenProblem::degenerate_critical(0.5, 1, 1), EigenProblem::degenerate_critical(0.9, 3, 0.5)}) {
        const Grid g = grid_for(p, 400);
        const auto pairs = solve_eigen(p, g, 8);
        REQUIRE(pairs.size() == 8);
        CHECK(pairs[0].eigenvalue > 0.0);
        for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i].eigenvalue > pairs[i - 1].eigenvalue);
        for (const auto& e : pairs) {
            CHECK(e.values.front() == 0.0);
            CHECK(e.values.back() == 0.0);
            CHECK(e.values[1] > 0.0);
            CHECK(e.weighted_norm == Approx(1.0).epsilon(1e-12));
            CHECK(e.sup_norm == sup_norm(e.values));
        }
        for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(pairs[0].values[i] > 0.0);
    }
}

TEST_CASE("weighted Gram matrix is the identity") {
    for (const auto& p : {EigenProblem::selfsimilar(1, 1, 1), EigenProblem::degenerate_critical(0.5, 1, 1)}) {
        const Grid g = grid_for(p, 2000);
        const auto pairs = solve_eigen(p, g, 6);
        const auto pencil = assemble_pencil(p, g);
        for (std::size_t i = 0; i < pairs.size(); ++i)
            for (std::size_t j = 0; j < pairs.size(); ++j) {
                const double gij = inner_K(pencil, pairs[i].values, pairs[j].values);
                CHECK(std::abs(gij - (i == j ? 1.0 : 0.0)) <= 1e-10);
            }
    }
}

TEST_CASE("Rayleigh quotient examples") {
    const auto p = EigenProblem::degenerate_critical(0.5, 1, 1);
    const Grid g = Grid::for_alpha(800, 0.5);
    const auto pairs = solve_eigen(p, g, 2);
    const double lam1 = pairs[0].eigenvalue;
    CHECK(std::abs(rayleigh_quotient(p, g, pairs[0].values) - lam1) <= 1e-8);
    CHECK(std::abs(rayleigh_quotient(p, g, pairs[1].values) - pairs[1].eigenvalue) <= 1e-8 * pairs[1].eigenvalue);

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        auto u = random_admissible(rng, g, 0.5);
        const double J = rayleigh_quotient(p, g, u);
        CHECK(J >= lam1 - 1e-8);
        for (double c : {-3.0, 1e-5, 7e4}) {
            std::vector<double> cu(u);
            for (auto& v : cu) v *= c;
            CHECK(rel(rayleigh_quotient(p, g, cu), J) <= 1e-12);
        }
    }
    const std::vector<double> zero(g.size(), 0.0);
    CHECK_THROWS_AS(rayleigh_quotient(p, g, zero), InvalidArgument);
}

TEST_CASE("separable solutions") {
    for (const auto& p : {EigenProblem::selfsimilar(1, 1, 1), EigenProblem::degenerate_critical(0.5, 1, 1)}) {
        const Grid g = grid_for(p, 400);
        const auto pairs = solve_eigen(p, g, 2);
        for (const auto& e : pairs) {
            const auto s0 = separable_solution(p, e, g, 0.0);
            CHECK(s0.values == e.values);
            CHECK(s0.factor == 1.0);
            // 1 + kt = 4
            const auto s = separable_solution(p, e, g, 3.0 / p.k());
            const double f = std::pow(4.0, -p.decay_power(e.eigenvalue));
            CHECK(s.factor == Approx(f).epsilon(1e-14));
            CHECK(s.sup_norm == Approx(f * e.sup_norm).epsilon(1e-14));
            CHECK(s.l2_norm == Approx(f * e.l2_norm).epsilon(1e-14));
        }
    }
    const auto ss = EigenProblem::selfsimilar(1, 1, 1);
    const auto e = solve_eigen(ss, Grid::uniform(100), 1)[0];
    CHECK(separable_solution(ss, e, Grid::uniform(100), 3.0).length == Approx(2.0));
    CHECK(ss.decay_power(1.7) == 1.7);
    CHECK(EigenProblem::degenerate_critical(0.5, 2.0, 1).decay_power(1.7) == Approx(0.85));
}

TEST_CASE("separable field solves the moving-domain equation to second order") {
    // (1+kt) times the transformed operator is time independent at the critical
    // exponent, so the residual reduces to A(0) phi + k * power * phi.
    for (double alpha : {0.0, 0.5}) {
        ProblemSpec s;
        s.alpha = alpha;
        s.law = BoundaryLaw::make(1, 1, gamma_critical(alpha));
        const auto p = alpha == 0.0 ? EigenProblem::selfsimilar(1, 1, 1) : EigenProblem::degenerate_critical(alpha, 1, 1);
        std::vector<double> res;
        for (std::size_t n : {100, 200, 400, 800}) {
            const Grid g = grid_for(p, n);
            const auto e = solve_eigen(p, g, 1)[0];
            const auto A = assemble_spatial_operator(s, g, 0.0, DriftScheme::hybrid);
            const double rate = p.k() * p.decay_power(e.eigenvalue);
            double l2 = 0.0;  // the sup residual is only first order in the x^(1-alpha) layer
            for (std::size_t i = 1; i + 1 < g.size(); ++i) {
                const double r = A.lower[i] * e.values[i - 1] + A.diag[i] * e.values[i] + A.upper[i] * e.values[i + 1] +
                                 rate * e.values[i];
                l2 += r * r * 0.5 * (g.node(i + 1) - g.node(i - 1));
            }
            res.push_back(std::sqrt(l2));
        }
        for (std::size_t i = 1; i < res.size(); ++i) {
            const double order = std::log2(res[i - 1] / res[i]);
            CHECK(order >= 1.8);
            CHECK(order <= 2.2);
        }
    }
}

TEST_CASE("warning when too many eigenpairs are requested") {
    std::ostringstream captured;
    auto* old = std::cerr.rdbuf(captured.rdbuf());
    const auto pairs = solve_eigen(EigenProblem::selfsimilar(1, 1, 1), Grid::uniform(40), 11);
    std::cerr.rdbuf(old);
    CHECK(pairs.size() == 11);
    CHECK(captured.str().find("warning") != std::string::npos);

    std::ostringstream quiet;
    old = std::cerr.rdbuf(quiet.rdbuf());
    solve_eigen(EigenProblem::selfsimilar(1, 1, 1), Grid::uniform(40), 10);
    std::cerr.rdbuf(old);
    CHECK(quiet.str().empty());

    CHECK_THROWS_AS(solve_eigen(EigenProblem::selfsimilar(1, 1, 1), Grid::uniform(40), 0), InvalidArgument);
}

TEST_CASE("Hardy inequality on random grid functions") {
    for (double alpha : {0.0, 0.25, 0.5, 0.75}) {
        const Grid g = Grid::uniform(2000);
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const auto u = harness::random_hardy_function(1000 * seed + std::uint64_t(alpha * 100), g, alpha);
            const auto h = harness::discrete_hardy(g, u, alpha);
            CHECK(h.lhs <= 1.02 * h.rhs);
        }
    }
    // Power x^s near the critical exponent approaches equality.
    const Grid g = Grid::uniform(2000);
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = std::pow(g.node(i), 0.5 + 0.05) * (1.0 - g.node(i));
    const auto h = harness::discrete_hardy(g, u, 0.0);
    CHECK(h.lhs / h.rhs > 0.5);
    CHECK(h.lhs <= h.rhs);
}

TEST_CASE("eigenpair CSV export") {
    const auto p = EigenProblem::selfsimilar(1, 1, 1);
    const Grid g = Grid::uniform(50);
    const auto pairs = solve_eigen(p, g, 2);
    std::ostringstream a, b;
    write_eigenpairs_csv(a, pairs);
    CHECK(a.str().rfind("kind,n,eigenvalue,weighted_norm,sup_norm\n", 0) == 0);
    CHECK(a.str().find("selfsimilar,1,") != std::string::npos);
    write_eigenfunction_csv(b, g, pairs[0]);
    std::istringstream in(b.str());
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);
    CHECK(line == "x,phi");
    while (std::getline(in, line)) ++rows;
    CHECK(rows == g.size());
}

#ifdef NCDECAY_HAVE_EIGEN
TEST_CASE("pencil eigenvalues match a dense generalized solve") {
    for (const auto& p : {EigenProblem::selfsimilar(1, 1, 1), EigenProblem::degenerate_critical(0.5, 1, 1)}) {
        const Grid g = grid_for(p, 300);
        const auto pc = assemble_pencil(p, g);
        const auto n = static_cast<Eigen::Index>(pc.s_diag.size());
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n), M = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            S(i, i) = pc.s_diag[i];
            M(i, i) = pc.m_diag[i];
            if (i + 1 < n) {
                S(i, i + 1) = S(i + 1, i) = pc.s_off[i];
                M(i, i + 1) = M(i + 1, i) = pc.m_off[i];
            }
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, M);
        REQUIRE(es.info() == Eigen::Success);
        const auto pairs = solve_eigen(p, g, 5);
        for (int i = 0; i < 5; ++i) CHECK(rel(pairs[i].eigenvalue, es.eigenvalues()(i)) <= 1e-10);
    }
}
#endif
