#pragma once

#include "odcsr/data.hpp"
#include "odcsr/elastic_net.hpp"
#include "odcsr/random_walk.hpp"

#include <variant>
#include <vector>

namespace odcsr {

struct UniformMeanFusion {};
struct WeightedFusion {
    std::vector<double> weights;
};
using Fusion = std::variant<UniformMeanFusion, WeightedFusion>;

struct CascadeConfig {
    int num_stages = 3;
    int walk_steps = 1000;
    ElasticNetConfig en_config;
    Fusion fusion = UniformMeanFusion{};
    /// Unit-normalize residual columns before the self-expression of stages
    /// 2..n. Raw residuals have norms that shrink unevenly (well-represented
    /// inliers shrink most), and the elastic net then favours large-norm
    /// columns, which routes walk mass to the outliers.
    bool renormalize_residuals = true;

    void validate() const;
};

struct StageResult {
    SelfRepresentation representation;
    /// Reconstruction of the residual R fed to this stage. Equals R * C when
    /// the residual was used as is, and R * (N^-1 C N) with N = diag of the
    /// residual column norms when it was renormalized.
    Eigen::MatrixXd reconstruction;
    ScoreVector scores;
    /// ||X - sum_{j<=i} Xhat^j||_F after this stage.
    double residual_norm = 0.0;
    /// Input residual was numerically zero; scores copied from the previous stage.
    bool short_circuited = false;
    double seconds = 0.0;
};

struct CascadeResult {
    std::vector<StageResult> stages;
    ScoreVector fused;
    CascadeConfig config;

    std::vector<Index> nonconverged_columns(std::size_t stage) const {
        return stages.at(stage).representation.nonconverged;
    }
    bool all_converged() const;
};

/// Input residual is treated as zero below this fraction of ||X||_F.
inline constexpr double kZeroResidualRatio = 1e-10;

/// X minus the sum of the given stage reconstructions.
Eigen::MatrixXd residual(const DataMatrix& x, const std::vector<StageResult>& stages);

ScoreVector fuse_scores(const std::vector<ScoreVector>& stage_scores, const Fusion& fusion);

/// Runs the cascade: stage 1 self-expresses X and walks from the uniform
/// distribution; stage i >= 2 self-expresses the residual and walks from the
/// scores of stage i-1. Per-stage scores are fused at the end.
CascadeResult run_cascade(const DataMatrix& x, const CascadeConfig& cfg, unsigned threads = 1);

} // namespace odcsr
