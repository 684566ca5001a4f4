#include "odcsr/baselines.hpp"

#include <cmath>

namespace odcsr {

ElasticNetConfig l1_threshold_preset() {
    ElasticNetConfig cfg;
    cfg.lambda = 0.99;
    return cfg;
}

Eigen::VectorXd l1_thresholding_scores(const DataMatrix& x, const ElasticNetConfig& cfg,
                                       unsigned threads) {
    const SelfRepresentation rep = solve_all(x, cfg, threads);
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(rep.num_points());
    for (Index j = 0; j < rep.coeffs.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(rep.coeffs, j); it; ++it) {
            scores[j] += std::abs(it.value());
        }
    }
    return scores;
}

CascadeConfig rgraph_preset() {
    CascadeConfig cfg;
    cfg.num_stages = 1;
    cfg.walk_steps = 1000;
    return cfg;
}

} // namespace odcsr
