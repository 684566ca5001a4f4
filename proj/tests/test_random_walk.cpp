#include "odcsr/random_walk.hpp"
#include "odcsr/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace odcsr;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& m) { return m.sparseView(); }

TransitionMatrix from_dense_probs(const Eigen::MatrixXd& p) {
    TransitionMatrix t;
    t.probs = p.sparseView();
    return t;
}

/// Random sparse-ish coefficient matrix with zero diagonal; some columns empty.
Eigen::MatrixXd random_coeffs(Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution keep(0.4), empty(0.15);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        if (empty(rng)) continue;
        for (Index i = 0; i < n; ++i)
            if (i != j && keep(rng)) c(i, j) = u(rng);
    }
    return c;
}

Eigen::VectorXd random_simplex(Index n, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = e(rng);
    return v / v.sum();
}

} // namespace

TEST_CASE("build_transition normalizes |C|^T rows") {
    Eigen::MatrixXd c(2, 2);
    c << 0, 1,
         2, 0;
    const auto p = build_transition(sparse(c));
    Eigen::MatrixXd expected(2, 2);
    expected << 0, 1,
                1, 0;
    CHECK(Eigen::MatrixXd(p.probs) == expected);
    CHECK(p.dangling.empty());
}

TEST_CASE("all-zero C gives uniform dangling rows") {
    const auto p = build_transition(SparseMatrix(3, 3));
    CHECK(p.dangling.size() == 3);
    CHECK((Eigen::MatrixXd(p.probs).array() == 1.0 / 3.0).all());
}

TEST_CASE("already-stochastic adjacency is unchanged") {
    Eigen::MatrixXd a(3, 3);
    a << 0, 1, 0,
         1, 0, 0,
         0.5, 0.5, 0;
    const auto p = build_transition(sparse(Eigen::MatrixXd(a.transpose())));
    CHECK(Eigen::MatrixXd(p.probs) == a);
}

TEST_CASE("averaged walk examples") {
    Eigen::MatrixXd swap(2, 2);
    swap << 0, 1,
            1, 0;
    for (int t : {1, 2, 7, 1000}) {
        const auto s = averaged_walk(from_dense_probs(swap), ScoreVector::uniform(2), t);
        CHECK(s[0] == 0.5);
        CHECK(s[1] == 0.5);
    }

    Eigen::MatrixXd p(3, 3);
    p << 0, 1, 0,
         1, 0, 0,
         0.5, 0.5, 0;
    const auto s = averaged_walk(from_dense_probs(p), ScoreVector::uniform(3), 2);
    CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s[2] == 0.0);

    std::mt19937_64 rng(3);
    const Eigen::MatrixXd q = oracle::dense_transition(random_coeffs(5, rng));
    const Eigen::VectorXd pi0 = random_simplex(5, rng);
    const auto one = averaged_walk(from_dense_probs(q), ScoreVector(pi0), 1);
    CHECK((one.probs() - (pi0.transpose() * q).transpose()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("classify thresholds scores") {
    const ScoreVector s(Eigen::Vector3d(0.5, 0.5, 0.0));
    CHECK(classify(s, 1e-6) == LabelVector{Label::inlier, Label::inlier, Label::outlier});
    const ScoreVector pos(Eigen::Vector3d(0.2, 0.3, 0.5));
    CHECK(count_outliers(classify(pos, 0.0)) == 0);
    CHECK(count_outliers(classify(pos, 1.0)) == 3);
    CHECK_THROWS_AS(classify(pos, -1.0), ConfigError);
}

TEST_CASE("score vector validation") {
    CHECK_THROWS_AS(ScoreVector(Eigen::Vector2d(0.6, 0.6)), ConfigError);
    CHECK_THROWS_AS(ScoreVector(Eigen::Vector2d(1.5, -0.5)), ConfigError);
    CHECK(ScoreVector(Eigen::Vector2d(1.0 + 1e-16, -1e-16))[1] == 0.0);
}

TEST_CASE("transition rows are stochastic for random C") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 1 + trial % 12;
        const auto p = build_transition(sparse(random_coeffs(n, rng)));
        const Eigen::MatrixXd d(p.probs);
        CHECK((d.array() >= 0.0).all());
        CHECK((d.array() <= 1.0).all());
        CHECK((d.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("averaged walk stays on the simplex and matches matrix powers") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> steps(1, 50);
    for (int trial = 0; trial < 60; ++trial) {
        const Index n = 2 + trial % 7;
        const Eigen::MatrixXd c = random_coeffs(n, rng);
        const auto p = build_transition(sparse(c));
        const Eigen::VectorXd pi0 = trial % 2 ? random_simplex(n, rng)
                                              : Eigen::VectorXd::Constant(n, 1.0 / double(n));
        const int t = steps(rng);
        const auto s = averaged_walk(p, ScoreVector(pi0), t);
        const Eigen::VectorXd ref = oracle::walk_by_powers(oracle::dense_transition(c), pi0, t);
        CHECK((s.probs() - ref).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(std::abs(s.probs().sum() - 1.0) <= 1e-10);
        CHECK((s.probs().array() >= 0.0).all());
    }
    // Long horizon.
    const auto p = build_transition(sparse(random_coeffs(30, rng)));
    const auto s = averaged_walk(p, ScoreVector::uniform(30), 10000);
    CHECK(std::abs(s.probs().sum() - 1.0) <= 1e-10);
}

TEST_CASE("mass drains out of sets that cannot be re-entered") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const Index n_in = 2 + trial % 4, n_out = 1 + trial % 3, n = n_in + n_out;
        // Adjacency: inliers only point to inliers; outliers point anywhere,
        // with at least one edge into the inlier set.
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                if (i == j) continue;
                if (i < n_in && j >= n_in) continue;
                a(i, j) = u(rng);
            }
        }
        const auto p = build_transition(sparse(Eigen::MatrixXd(a.transpose())));
        for (int t : {2, 5, 50}) {
            const auto s = averaged_walk(p, ScoreVector::uniform(n), t);
            const double outlier_mass = s.probs().tail(n_out).sum();
            CHECK(outlier_mass < double(n_out) / double(n));
        }
    }
}

TEST_CASE("walk rejects bad arguments") {
    const auto p = build_transition(SparseMatrix(3, 3));
    CHECK_THROWS_AS(averaged_walk(p, ScoreVector::uniform(2), 5), DimensionError);
    CHECK_THROWS_AS(averaged_walk(p, ScoreVector::uniform(3), 0), ConfigError);
}
