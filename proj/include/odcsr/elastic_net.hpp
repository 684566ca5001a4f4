#pragma once

#include "odcsr/data.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <variant>
#include <vector>

namespace odcsr {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;

struct FixedGamma {
    double gamma = 1.0;
};

/// gamma_j = alpha * lambda / max_{i != j} |x_i^T x_j|, so the soft threshold
/// always sits strictly below the largest correlation.
struct RelativeGamma {
    double alpha = 5.0;
};

using GammaMode = std::variant<FixedGamma, RelativeGamma>;

struct ElasticNetConfig {
    double lambda = 0.9;
    GammaMode gamma_mode = RelativeGamma{};
    int max_iters = 2000;
    double tol = 1e-6;

    void validate() const;
};

/// Coefficients below this magnitude are not stored.
inline constexpr double kCoefficientDropTol = 1e-12;

struct ColumnSolution {
    /// Length N, entry j is always zero.
    Eigen::VectorXd coeffs;
    double objective = 0.0;
    double gamma = 0.0;
    /// Max KKT violation scaled by 1/(1+lambda).
    double kkt_residual = 0.0;
    int iters = 0;
    bool converged = false;
    /// Objective at every accepted iterate, only filled on request.
    std::vector<double> objective_trace;
};

/// Column-separable self-expression problem
///
///   min_c (gamma/2)||x_j - X c||^2 + lambda ||c||_1 + ((1-lambda)/2)||c||^2,  c_j = 0
///
/// solved with monotone accelerated proximal gradient over the Gram matrix.
/// The Gram matrix and spectral bound are computed once and shared by all
/// columns; solving a column touches only private state.
class SelfExpressionProblem {
public:
    SelfExpressionProblem(const Eigen::MatrixXd& x, ElasticNetConfig cfg);

    Index num_points() const noexcept { return gram_.cols(); }
    const ElasticNetConfig& config() const noexcept { return cfg_; }
    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    /// Power-iteration estimate of the largest eigenvalue of X^T X.
    double spectral_bound() const noexcept { return spectral_bound_; }

    double gamma(Index j) const;
    double objective(Index j, const Eigen::VectorXd& c) const;
    double kkt_residual(Index j, const Eigen::VectorXd& c) const;
    ColumnSolution solve(Index j, bool record_trace = false) const;

private:
    ElasticNetConfig cfg_;
    Eigen::MatrixXd gram_;
    double spectral_bound_ = 0.0;
};

struct SelfRepresentation {
    /// N x N, column j represents point j; diagonal never stored.
    SparseMatrix coeffs;
    Eigen::VectorXd per_column_objective;
    std::vector<int> per_column_iters;
    std::vector<double> per_column_gamma;
    std::vector<Index> nonconverged;

    Index num_points() const noexcept { return coeffs.cols(); }
    bool all_converged() const noexcept { return nonconverged.empty(); }
};

double effective_gamma(const Eigen::MatrixXd& x, Index j, const ElasticNetConfig& cfg);

ColumnSolution solve_column(const Eigen::MatrixXd& x, Index j, const ElasticNetConfig& cfg);

/// Solves every column. threads == 0 uses the hardware concurrency; the
/// result is bit-identical for any thread count.
SelfRepresentation solve_all(const Eigen::MatrixXd& x, const ElasticNetConfig& cfg,
                             unsigned threads = 1);

inline SelfRepresentation solve_all(const DataMatrix& x, const ElasticNetConfig& cfg,
                                    unsigned threads = 1) {
    return solve_all(x.values(), cfg, threads);
}

} // namespace odcsr
