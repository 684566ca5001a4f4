#pragma once

#include "odcsr/cascade.hpp"
#include "odcsr/elastic_net.hpp"
#include "odcsr/evaluation.hpp"

namespace odcsr {

/// Elastic-net settings standing in for the pure l1 program of the
/// l1-thresholding detector (lambda pushed to 0.99).
ElasticNetConfig l1_threshold_preset();

inline constexpr Polarity kL1ThresholdPolarity = Polarity::high_is_outlier;

/// ||c_j||_1 per column. Higher means more outlier-like.
Eigen::VectorXd l1_thresholding_scores(const DataMatrix& x, const ElasticNetConfig& cfg,
                                       unsigned threads = 1);

/// Single-stage cascade: the random-walk detector on one self-representation.
CascadeConfig rgraph_preset();

} // namespace odcsr
