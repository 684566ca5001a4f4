#include "odcsr/elastic_net.hpp"
#include "odcsr/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace odcsr;

namespace {

ElasticNetConfig fixed(double gamma, double lambda) {
    ElasticNetConfig cfg;
    cfg.lambda = lambda;
    cfg.gamma_mode = FixedGamma{gamma};
    return cfg;
}

bool stores_diagonal(const SparseMatrix& c) {
    for (Index j = 0; j < c.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(c, j); it; ++it)
            if (it.row() == it.col()) return true;
    return false;
}

} // namespace

TEST_CASE("config validation") {
    ElasticNetConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.lambda = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.lambda = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ElasticNetConfig{};
    cfg.gamma_mode = RelativeGamma{1.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.gamma_mode = FixedGamma{0.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.gamma_mode = FixedGamma{2.0};
    cfg.lambda = 0.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("orthogonal columns give an empty representation") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(4, 4);
    for (double gamma : {0.5, 10.0, 1000.0}) {
        const auto rep = solve_all(x, fixed(gamma, 0.5));
        CHECK(rep.coeffs.nonZeros() == 0);
        CHECK(rep.all_converged());
    }
    const auto rep = solve_all(Eigen::MatrixXd::Identity(2, 2), ElasticNetConfig{});
    CHECK(rep.coeffs.nonZeros() == 0);
}

TEST_CASE("duplicate columns match the one-variable closed form") {
    Eigen::MatrixXd x(3, 2);
    x.col(0) = Eigen::Vector3d(1, 2, 2) / 3.0;
    x.col(1) = x.col(0);
    const double gamma = 10.0, lambda = 0.5;

    // Grid oracle over [0, 1] at 1e-6 resolution.
    const double grid = oracle::grid_argmin(
        [&](double c) {
            return 0.5 * gamma * (1 - c) * (1 - c) + lambda * std::abs(c) +
                   0.5 * (1 - lambda) * c * c;
        },
        0.0, 1.0, 1e-6);
    CHECK(std::abs(grid - 0.904762) <= 1e-6);

    const auto sol = solve_column(x, 0, fixed(gamma, lambda));
    CHECK(sol.converged);
    CHECK(sol.coeffs[0] == 0.0);
    CHECK(std::abs(sol.coeffs[1] - 0.904762) <= 1e-6);
    CHECK(std::abs(sol.coeffs[1] - grid) <= 2e-6);

    const auto rep = solve_all(x, fixed(gamma, lambda));
    const Eigen::MatrixXd c(rep.coeffs);
    CHECK(c(0, 0) == 0.0);
    CHECK(c(1, 1) == 0.0);
    CHECK(std::abs(c(0, 1) - 0.904762) <= 1e-6);
    CHECK(std::abs(c(1, 0) - 0.904762) <= 1e-6);
}

TEST_CASE("weak correlation below the soft threshold stays zero") {
    Eigen::MatrixXd x(2, 2);
    x << 1.0, 0.3,
         0.0, std::sqrt(1.0 - 0.09);
    const double gamma = 1.0, lambda = 0.9;
    const double grid = oracle::grid_argmin(
        [&](double c) { return oracle::en_objective(x, 0, Eigen::Vector2d(0.0, c), gamma, lambda); },
        -1.0, 1.0, 1e-6);
    CHECK(std::abs(grid) <= 1e-6);
    const auto sol = solve_column(x, 0, fixed(gamma, lambda));
    CHECK(sol.converged);
    CHECK(sol.coeffs.isZero(0.0));
}

TEST_CASE("zero iteration budget flags every column") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd x = oracle::random_unit_columns(5, 6, rng);
    ElasticNetConfig cfg;
    cfg.max_iters = 0;
    const auto rep = solve_all(x, cfg);
    CHECK(rep.nonconverged.size() == 6);
    CHECK(rep.coeffs.nonZeros() == 0);
}

TEST_CASE("effective gamma") {
    Eigen::MatrixXd x(2, 3);
    x << 1.0, 0.5, 0.0,
         0.0, std::sqrt(0.75), 0.0;
    x(1, 2) = 0.0;
    ElasticNetConfig cfg;
    cfg.lambda = 0.9;
    cfg.gamma_mode = RelativeGamma{5.0};
    // mu_0 = |x_0 . x_1| = 0.5
    CHECK(effective_gamma(x, 0, cfg) == doctest::Approx(9.0).epsilon(1e-14));

    Eigen::MatrixXd orth = Eigen::MatrixXd::Identity(3, 3);
    CHECK(effective_gamma(orth, 1, cfg) == 5.0);
    CHECK(solve_column(orth, 1, cfg).coeffs.isZero(0.0));

    cfg.gamma_mode = RelativeGamma{1.0};
    CHECK_THROWS_AS(effective_gamma(x, 0, cfg), ConfigError);

    cfg.gamma_mode = FixedGamma{3.0};
    CHECK(effective_gamma(x, 0, cfg) == 3.0);
}

TEST_CASE("relative gamma gives every correlated column a nonzero representation") {
    std::mt19937_64 rng(17);
    const Eigen::MatrixXd x = oracle::random_unit_columns(6, 12, rng);
    const auto rep = solve_all(x, ElasticNetConfig{});
    for (Index j = 0; j < x.cols(); ++j) {
        CHECK(rep.coeffs.col(j).nonZeros() > 0);
    }
}

TEST_CASE("KKT certificate holds on random problems") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const Index d = 2 + trial % 7, n = 3 + trial % 9;
        const Eigen::MatrixXd x = oracle::random_unit_columns(d, n, rng);
        ElasticNetConfig cfg;
        cfg.lambda = trial % 2 ? 0.9 : 0.5;
        if (trial % 3 == 0) cfg.gamma_mode = FixedGamma{10.0};
        const SelfExpressionProblem problem(x, cfg);
        for (Index j = 0; j < n; ++j) {
            const auto sol = problem.solve(j);
            REQUIRE(sol.converged);
            const double g_j = sol.gamma;
            const Eigen::VectorXd& c = sol.coeffs;
            const Eigen::VectorXd g =
                g_j * x.transpose() * (x * c - x.col(j)) + (1 - cfg.lambda) * c;
            const double slack = cfg.tol * (1 + cfg.lambda) + 1e-12;
            for (Index i = 0; i < n; ++i) {
                if (i == j) continue;
                if (c[i] != 0.0) {
                    CHECK(std::abs(g[i] + cfg.lambda * (c[i] > 0 ? 1 : -1)) <= slack);
                } else {
                    CHECK(std::abs(g[i]) <= cfg.lambda + slack);
                }
            }
        }
    }
}

TEST_CASE("objective is monotone along the iterates") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd x = oracle::random_unit_columns(8, 15, rng);
        ElasticNetConfig cfg;
        cfg.gamma_mode = trial % 2 ? GammaMode{FixedGamma{50.0}} : GammaMode{RelativeGamma{5.0}};
        const SelfExpressionProblem problem(x, cfg);
        const auto sol = problem.solve(trial % 15, true);
        REQUIRE(sol.objective_trace.size() >= 2);
        for (std::size_t k = 1; k < sol.objective_trace.size(); ++k) {
            CHECK(sol.objective_trace[k] <= sol.objective_trace[k - 1] + 1e-12);
        }
    }
}

TEST_CASE("solver matches the projected-gradient oracle") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const Index d = 3 + trial % 6, n = 3 + trial % 4;
        const Eigen::MatrixXd x = oracle::random_unit_columns(d, n, rng);
        const double gamma = trial % 2 ? 10.0 : 1.0, lambda = trial % 3 ? 0.9 : 0.5;
        for (Index j = 0; j < n; ++j) {
            const auto sol = solve_column(x, j, fixed(gamma, lambda));
            const Eigen::VectorXd ref = oracle::projected_gradient(x, j, gamma, lambda);
            const double mine = oracle::en_objective(x, j, sol.coeffs, gamma, lambda);
            const double theirs = oracle::en_objective(x, j, ref, gamma, lambda);
            CHECK(std::abs(mine - theirs) <= 1e-6);
            CHECK(std::abs(sol.objective - mine) <= 1e-10);
        }
    }
}

TEST_CASE("permuting points permutes the representation") {
    std::mt19937_64 rng(53);
    const Eigen::MatrixXd x = oracle::random_unit_columns(6, 10, rng);
    std::vector<Index> perm(10);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd xp(6, 10);
    for (Index k = 0; k < 10; ++k) xp.col(k) = x.col(perm[std::size_t(k)]);

    const Eigen::MatrixXd c(solve_all(x, ElasticNetConfig{}).coeffs);
    const Eigen::MatrixXd cp(solve_all(xp, ElasticNetConfig{}).coeffs);
    for (Index a = 0; a < 10; ++a)
        for (Index b = 0; b < 10; ++b)
            CHECK(std::abs(cp(a, b) - c(perm[std::size_t(a)], perm[std::size_t(b)])) <= 1e-5);
}

TEST_CASE("zero diagonal is structural and results ignore thread count") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd x = oracle::random_unit_columns(5, 20 + trial, rng);
        const auto one = solve_all(x, ElasticNetConfig{}, 1);
        const auto many = solve_all(x, ElasticNetConfig{}, 4);
        CHECK_FALSE(stores_diagonal(one.coeffs));
        CHECK(Eigen::MatrixXd(one.coeffs) == Eigen::MatrixXd(many.coeffs));
        CHECK(one.per_column_objective == many.per_column_objective);
        const auto col3 = solve_column(x, 3, ElasticNetConfig{});
        for (Index i = 0; i < x.cols(); ++i) {
            const double stored = one.coeffs.coeff(i, 3);
            CHECK(stored == (std::abs(col3.coeffs[i]) >= kCoefficientDropTol ? col3.coeffs[i] : 0.0));
        }
    }
}
