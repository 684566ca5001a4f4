#include "odcsr/elastic_net.hpp"
#include "odcsr/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

namespace odcsr {

namespace {

constexpr int kPowerIterations = 30;
constexpr int kMaxBacktracks = 60;
constexpr double kZeroCorrelation = 1e-12;

double relative_gamma(double mu, double lambda, double alpha) {
    return mu <= kZeroCorrelation ? alpha : alpha * lambda / mu;
}

double max_offdiag_abs(const Eigen::Ref<const Eigen::VectorXd>& col, Index j) {
    double mu = 0.0;
    for (Index i = 0; i < col.size(); ++i) {
        if (i != j) mu = std::max(mu, std::abs(col[i]));
    }
    return mu;
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

double power_iteration(const Eigen::MatrixXd& g) {
    if (g.cols() == 0) return 0.0;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(g.cols()) / std::sqrt(double(g.cols()));
    double est = 0.0;
    for (int it = 0; it < kPowerIterations; ++it) {
        Eigen::VectorXd w = g * v;
        const double n = w.norm();
        if (n == 0.0) return 0.0;
        est = v.dot(w);
        v = w / n;
    }
    return std::max(est, v.dot(g * v));
}

} // namespace

void ElasticNetConfig::validate() const {
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw ConfigError("lambda must lie in [0, 1), got " + std::to_string(lambda));
    }
    if (max_iters < 0) throw ConfigError("max_iters must be non-negative");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (const auto* f = std::get_if<FixedGamma>(&gamma_mode)) {
        if (!(f->gamma > 0.0)) throw ConfigError("fixed gamma must be positive");
    } else {
        const auto& r = std::get<RelativeGamma>(gamma_mode);
        if (!(r.alpha > 1.0)) throw ConfigError("relative gamma needs alpha > 1");
        // gamma_j = alpha * lambda / mu_j would vanish.
        if (lambda == 0.0) throw ConfigError("relative gamma needs lambda > 0");
    }
}

SelfExpressionProblem::SelfExpressionProblem(const Eigen::MatrixXd& x, ElasticNetConfig cfg)
    : cfg_(std::move(cfg)) {
    cfg_.validate();
    gram_.noalias() = x.transpose() * x;
    spectral_bound_ = power_iteration(gram_);
}

double SelfExpressionProblem::gamma(Index j) const {
    if (const auto* f = std::get_if<FixedGamma>(&cfg_.gamma_mode)) return f->gamma;
    const double mu = max_offdiag_abs(gram_.col(j), j);
    return relative_gamma(mu, cfg_.lambda, std::get<RelativeGamma>(cfg_.gamma_mode).alpha);
}

namespace {

/// Sparse-aware G * c.
void gram_times(const Eigen::MatrixXd& g, const Eigen::VectorXd& c, Eigen::VectorXd& out) {
    out.setZero();
    for (Index k = 0; k < c.size(); ++k) {
        if (c[k] != 0.0) out.noalias() += c[k] * g.col(k);
    }
}

struct Terms {
    double gamma, lambda, l2, xx;
    const Eigen::MatrixXd* g;
    Index j;

    double smooth(const Eigen::VectorXd& c, const Eigen::VectorXd& gc) const {
        const auto b = g->col(j);
        return 0.5 * gamma * (xx - 2.0 * b.dot(c) + c.dot(gc)) + 0.5 * l2 * c.squaredNorm();
    }
    double full(const Eigen::VectorXd& c, const Eigen::VectorXd& gc) const {
        return smooth(c, gc) + lambda * c.lpNorm<1>();
    }
    void gradient(const Eigen::VectorXd& c, const Eigen::VectorXd& gc, Eigen::VectorXd& out) const {
        out = gamma * (gc - g->col(j)) + l2 * c;
        out[j] = 0.0;
    }
    double kkt(const Eigen::VectorXd& c, const Eigen::VectorXd& grad) const {
        double worst = 0.0;
        for (Index i = 0; i < c.size(); ++i) {
            if (i == j) continue;
            const double v = c[i] != 0.0 ? std::abs(grad[i] + lambda * (c[i] > 0 ? 1.0 : -1.0))
                                          : std::max(std::abs(grad[i]) - lambda, 0.0);
            worst = std::max(worst, v);
        }
        return worst / (1.0 + lambda);
    }
};

} // namespace

double SelfExpressionProblem::objective(Index j, const Eigen::VectorXd& c) const {
    Terms terms{gamma(j), cfg_.lambda, 1.0 - cfg_.lambda, gram_(j, j), &gram_, j};
    Eigen::VectorXd gc(c.size());
    gram_times(gram_, c, gc);
    return terms.full(c, gc);
}

double SelfExpressionProblem::kkt_residual(Index j, const Eigen::VectorXd& c) const {
    Terms terms{gamma(j), cfg_.lambda, 1.0 - cfg_.lambda, gram_(j, j), &gram_, j};
    Eigen::VectorXd gc(c.size()), grad(c.size());
    gram_times(gram_, c, gc);
    terms.gradient(c, gc, grad);
    return terms.kkt(c, grad);
}

ColumnSolution SelfExpressionProblem::solve(Index j, bool record_trace) const {
    const Index n = num_points();
    if (j < 0 || j >= n) throw DimensionError("column index out of range");

    const Terms terms{gamma(j), cfg_.lambda, 1.0 - cfg_.lambda, gram_(j, j), &gram_, j};

    ColumnSolution sol;
    sol.gamma = terms.gamma;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n), gx = Eigen::VectorXd::Zero(n);
    double fx = terms.full(x, gx);
    Eigen::VectorXd grad(n);
    terms.gradient(x, gx, grad);
    sol.kkt_residual = terms.kkt(x, grad);
    if (record_trace) sol.objective_trace.push_back(fx);

    if (cfg_.max_iters == 0) {
        sol.coeffs = std::move(x);
        sol.objective = fx;
        return sol;
    }

    double step = 1.0 / (terms.gamma * spectral_bound_ + terms.l2);
    double t = 1.0;
    Eigen::VectorXd y = x, gy = gx, gz(n), z(n), x_prev(n), gx_prev(n);
    Eigen::VectorXd grad_y(n);

    int k = 0;
    for (;; ++k) {
        if (sol.kkt_residual <= cfg_.tol) {
            sol.converged = true;
            break;
        }
        if (k == cfg_.max_iters) break;

        terms.gradient(y, gy, grad_y);
        const double fy = terms.smooth(y, gy);
        double fz = 0.0;
        for (int bt = 0;; ++bt) {
            for (Index i = 0; i < n; ++i) {
                z[i] = i == j ? 0.0 : soft_threshold(y[i] - step * grad_y[i], step * terms.lambda);
            }
            gram_times(gram_, z, gz);
            fz = terms.smooth(z, gz);
            const Eigen::VectorXd d = z - y;
            const double model = fy + grad_y.dot(d) + d.squaredNorm() / (2.0 * step);
            if (fz <= model + 1e-14 * (1.0 + std::abs(fy)) || bt == kMaxBacktracks) break;
            step *= 0.5;
        }
        const double full_z = fz + terms.lambda * z.lpNorm<1>();

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        // Gradient-based restart: momentum pointing uphill.
        const bool uphill = (y - z).dot(z - x) > 0.0;
        if (full_z <= fx) {
            x_prev.swap(x);
            gx_prev.swap(gx);
            x = z;
            gx = gz;
            fx = full_z;
            if (uphill) {
                t = 1.0;
                y = x;
                gy = gx;
            } else {
                const double beta = (t - 1.0) / t_next;
                y = x + beta * (x - x_prev);
                gy = gx + beta * (gx - gx_prev);
                t = t_next;
            }
        } else {
            // Rejected step: keep the iterate, drop the momentum.
            t = 1.0;
            y = x;
            gy = gx;
        }
        if (record_trace) sol.objective_trace.push_back(fx);
        terms.gradient(x, gx, grad);
        sol.kkt_residual = terms.kkt(x, grad);
    }

    sol.iters = k;
    sol.objective = fx;
    sol.coeffs = std::move(x);
    return sol;
}

double effective_gamma(const Eigen::MatrixXd& x, Index j, const ElasticNetConfig& cfg) {
    cfg.validate();
    if (const auto* f = std::get_if<FixedGamma>(&cfg.gamma_mode)) return f->gamma;
    const Eigen::VectorXd corr = x.transpose() * x.col(j);
    return relative_gamma(max_offdiag_abs(corr, j), cfg.lambda,
                          std::get<RelativeGamma>(cfg.gamma_mode).alpha);
}

ColumnSolution solve_column(const Eigen::MatrixXd& x, Index j, const ElasticNetConfig& cfg) {
    return SelfExpressionProblem(x, cfg).solve(j);
}

SelfRepresentation solve_all(const Eigen::MatrixXd& x, const ElasticNetConfig& cfg,
                             unsigned threads) {
    const SelfExpressionProblem problem(x, cfg);
    const Index n = problem.num_points();
    std::vector<ColumnSolution> cols(static_cast<std::size_t>(n));

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<Index>(threads, std::max<Index>(n, 1)));
    std::atomic<Index> next{0};
    auto worker = [&] {
        for (Index j; (j = next.fetch_add(1)) < n;) {
            cols[static_cast<std::size_t>(j)] = problem.solve(j);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    SelfRepresentation rep;
    rep.per_column_objective.resize(n);
    rep.per_column_iters.reserve(static_cast<std::size_t>(n));
    rep.per_column_gamma.reserve(static_cast<std::size_t>(n));
    std::vector<Eigen::Triplet<double, Index>> triplets;
    for (Index j = 0; j < n; ++j) {
        const auto& c = cols[static_cast<std::size_t>(j)];
        for (Index i = 0; i < n; ++i) {
            if (i != j && std::abs(c.coeffs[i]) >= kCoefficientDropTol) {
                triplets.emplace_back(i, j, c.coeffs[i]);
            }
        }
        rep.per_column_objective[j] = c.objective;
        rep.per_column_iters.push_back(c.iters);
        rep.per_column_gamma.push_back(c.gamma);
        if (!c.converged) rep.nonconverged.push_back(j);
    }
    rep.coeffs.resize(n, n);
    rep.coeffs.setFromTriplets(triplets.begin(), triplets.end());
    rep.coeffs.makeCompressed();
    return rep;
}

} // namespace odcsr
