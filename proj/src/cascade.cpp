#include "odcsr/cascade.hpp"
#include "odcsr/errors.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace odcsr {

void CascadeConfig::validate() const {
    if (num_stages < 1) throw ConfigError("number of stages must be >= 1");
    if (walk_steps < 1) throw ConfigError("walk steps must be >= 1");
    en_config.validate();
    if (const auto* w = std::get_if<WeightedFusion>(&fusion)) {
        if (static_cast<int>(w->weights.size()) != num_stages) {
            throw ConfigError("fusion weights must have one entry per stage");
        }
        double total = 0.0;
        for (double v : w->weights) {
            if (!(v >= 0.0)) throw ConfigError("fusion weights must be nonnegative");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ConfigError("fusion weights must sum to 1");
    }
}

bool CascadeResult::all_converged() const {
    for (const auto& s : stages) {
        if (!s.representation.all_converged()) return false;
    }
    return true;
}

Eigen::MatrixXd residual(const DataMatrix& x, const std::vector<StageResult>& stages) {
    Eigen::MatrixXd r = x.values();
    for (const auto& s : stages) {
        if (s.reconstruction.rows() != r.rows() || s.reconstruction.cols() != r.cols()) {
            throw DimensionError("stage reconstruction shape does not match data");
        }
        r -= s.reconstruction;
    }
    return r;
}

ScoreVector fuse_scores(const std::vector<ScoreVector>& stage_scores, const Fusion& fusion) {
    if (stage_scores.empty()) throw DimensionError("no stage scores to fuse");
    const Index n = stage_scores.front().size();
    for (const auto& s : stage_scores) {
        if (s.size() != n) throw DimensionError("stage score vectors differ in length");
    }
    std::vector<double> weights;
    if (const auto* w = std::get_if<WeightedFusion>(&fusion)) {
        if (w->weights.size() != stage_scores.size()) {
            throw DimensionError("fusion weight count does not match stage count");
        }
        weights = w->weights;
    } else {
        weights.assign(stage_scores.size(), 1.0 / double(stage_scores.size()));
    }
    Eigen::VectorXd fused = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < stage_scores.size(); ++i) {
        if (weights[i] != 0.0) fused += weights[i] * stage_scores[i].probs();
    }
    return ScoreVector(std::move(fused));
}

namespace {

ScoreVector as_seed(const ScoreVector& prev) {
    const double total = prev.probs().sum();
    if (std::abs(total - 1.0) > kSimplexTol) return ScoreVector(prev.probs() / total);
    return prev;
}

} // namespace

CascadeResult run_cascade(const DataMatrix& x, const CascadeConfig& cfg, unsigned threads) {
    cfg.validate();
    const Index n = x.num_points();
    const double data_norm = x.values().norm();

    std::vector<StageResult> stages;
    stages.reserve(static_cast<std::size_t>(cfg.num_stages));
    Eigen::MatrixXd current = x.values();
    ScoreVector seed = ScoreVector::uniform(n);

    for (int i = 0; i < cfg.num_stages; ++i) {
        const auto start = std::chrono::steady_clock::now();
        const double input_norm = current.norm();
        if (i > 0 && input_norm <= kZeroResidualRatio * data_norm) {
            StageResult copy{SelfRepresentation{}, Eigen::MatrixXd::Zero(x.dim(), n),
                             stages.back().scores, input_norm, true, 0.0};
            copy.representation.coeffs.resize(n, n);
            copy.representation.per_column_objective = Eigen::VectorXd::Zero(n);
            copy.representation.per_column_iters.assign(static_cast<std::size_t>(n), 0);
            stages.push_back(std::move(copy));
            continue;
        }

        Eigen::MatrixXd reconstruction;
        SelfRepresentation rep;
        if (cfg.renormalize_residuals && i > 0) {
            Eigen::VectorXd norms = current.colwise().norm().transpose();
            Eigen::MatrixXd scaled = current;
            for (Index j = 0; j < n; ++j) {
                if (norms[j] > 0.0) scaled.col(j) /= norms[j];
            }
            rep = solve_all(scaled, cfg.en_config, threads);
            reconstruction = (scaled * rep.coeffs) * norms.asDiagonal();
        } else {
            rep = solve_all(current, cfg.en_config, threads);
            reconstruction = current * rep.coeffs;
        }

        ScoreVector scores =
            averaged_walk(build_transition(rep.coeffs), seed, cfg.walk_steps);
        current -= reconstruction;
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        stages.push_back(StageResult{std::move(rep), std::move(reconstruction), scores,
                                     current.norm(), false, seconds});
        seed = as_seed(scores);
    }

    std::vector<ScoreVector> per_stage;
    per_stage.reserve(stages.size());
    for (const auto& s : stages) per_stage.push_back(s.scores);
    ScoreVector fused = fuse_scores(per_stage, cfg.fusion);
    return CascadeResult{std::move(stages), std::move(fused), cfg};
}

} // namespace odcsr
