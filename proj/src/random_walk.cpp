#include "odcsr/random_walk.hpp"
#include "odcsr/errors.hpp"

#include <cmath>
#include <string>

namespace odcsr {

ScoreVector::ScoreVector(Eigen::VectorXd probs) : probs_(std::move(probs)) {
    for (Index i = 0; i < probs_.size(); ++i) {
        double& v = probs_[i];
        if (!std::isfinite(v)) throw ConfigError("score vector has a non-finite entry");
        if (v < 0.0) {
            if (v < -1e-15) throw ConfigError("score vector has a negative entry");
            v = 0.0;
        }
    }
    if (std::abs(probs_.sum() - 1.0) > kSimplexTol) {
        throw ConfigError("score vector does not sum to 1");
    }
}

ScoreVector ScoreVector::uniform(Index n) {
    if (n <= 0) throw DimensionError("score vector needs at least one entry");
    return ScoreVector(Eigen::VectorXd::Constant(n, 1.0 / double(n)));
}

TransitionMatrix build_transition(const SparseMatrix& coeffs) {
    const Index n = coeffs.cols();
    if (coeffs.rows() != n) throw DimensionError("coefficient matrix must be square");

    // Row i of A = |C|^T is column i of |C|.
    TransitionMatrix out;
    std::vector<Eigen::Triplet<double, Index>> triplets;
    triplets.reserve(static_cast<std::size_t>(coeffs.nonZeros()));
    for (Index i = 0; i < n; ++i) {
        double degree = 0.0;
        for (SparseMatrix::InnerIterator it(coeffs, i); it; ++it) degree += std::abs(it.value());
        if (degree <= kDanglingTol) {
            out.dangling.push_back(i);
            for (Index k = 0; k < n; ++k) triplets.emplace_back(i, k, 1.0 / double(n));
            continue;
        }
        for (SparseMatrix::InnerIterator it(coeffs, i); it; ++it) {
            if (it.value() != 0.0) triplets.emplace_back(i, it.row(), std::abs(it.value()) / degree);
        }
    }
    out.probs.resize(n, n);
    out.probs.setFromTriplets(triplets.begin(), triplets.end());
    out.probs.makeCompressed();
    return out;
}

ScoreVector averaged_walk(const TransitionMatrix& p, const ScoreVector& pi0, int steps) {
    const Index n = p.size();
    if (pi0.size() != n) throw DimensionError("initial distribution length mismatch");
    if (steps < 1) throw ConfigError("walk steps must be >= 1");

    Eigen::VectorXd current = pi0.probs();
    Eigen::VectorXd next(n);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < steps; ++t) {
        next.setZero();
        for (Index i = 0; i < n; ++i) {
            const double mass = current[i];
            if (mass == 0.0) continue;
            for (RowSparseMatrix::InnerIterator it(p.probs, i); it; ++it) {
                next[it.col()] += mass * it.value();
            }
        }
        sum += next;
        current.swap(next);
    }
    sum /= double(steps);
    for (Index i = 0; i < n; ++i) {
        if (sum[i] < 0.0) sum[i] = 0.0;
    }
    return ScoreVector(std::move(sum));
}

LabelVector classify(const ScoreVector& scores, double epsilon) {
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
    LabelVector labels(static_cast<std::size_t>(scores.size()));
    for (Index i = 0; i < scores.size(); ++i) {
        labels[static_cast<std::size_t>(i)] = scores[i] <= epsilon ? Label::outlier : Label::inlier;
    }
    return labels;
}

} // namespace odcsr
