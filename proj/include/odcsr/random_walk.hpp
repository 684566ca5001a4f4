#pragma once

#include "odcsr/data.hpp"
#include "odcsr/elastic_net.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace odcsr {

using RowSparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

/// Rows whose out-weight is at or below this are treated as dangling.
inline constexpr double kDanglingTol = 1e-12;

/// Row-stochastic transition matrix of the graph with adjacency A = |C|^T.
struct TransitionMatrix {
    RowSparseMatrix probs;
    /// Rows replaced by the uniform distribution.
    std::vector<Index> dangling;

    Index size() const noexcept { return probs.rows(); }
};

/// Nonnegative length-N vector summing to one. Low mass marks outliers.
class ScoreVector {
public:
    /// Validates nonnegativity and unit sum (1e-10); entries in [-1e-15, 0)
    /// are clamped to zero first.
    explicit ScoreVector(Eigen::VectorXd probs);

    static ScoreVector uniform(Index n);

    const Eigen::VectorXd& probs() const noexcept { return probs_; }
    Index size() const noexcept { return probs_.size(); }
    double operator[](Index i) const { return probs_[i]; }

private:
    Eigen::VectorXd probs_;
};

inline constexpr double kSimplexTol = 1e-10;

TransitionMatrix build_transition(const SparseMatrix& coeffs);
inline TransitionMatrix build_transition(const SelfRepresentation& rep) {
    return build_transition(rep.coeffs);
}

/// (1/T) sum_{t=1..T} pi0 P^t via repeated vector-matrix products.
ScoreVector averaged_walk(const TransitionMatrix& p, const ScoreVector& pi0, int steps);

/// Outlier iff score <= epsilon.
LabelVector classify(const ScoreVector& scores, double epsilon);

} // namespace odcsr
