#include "odcsr/data.hpp"
#include "odcsr/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace odcsr {

DataMatrix::DataMatrix(Eigen::MatrixXd values, std::vector<std::string> point_ids)
    : values_(std::move(values)), ids_(std::move(point_ids)) {
    if (values_.cols() < 2) {
        throw DimensionError("data matrix needs at least 2 points, got " +
                             std::to_string(values_.cols()));
    }
    if (!values_.allFinite()) {
        throw ParseError("data matrix contains non-finite entries");
    }
    if (!ids_.empty() && static_cast<Index>(ids_.size()) != values_.cols()) {
        throw DimensionError("point id count does not match number of points");
    }
}

std::string DataMatrix::id(Index j) const {
    return ids_.empty() ? std::to_string(j) : ids_[static_cast<std::size_t>(j)];
}

std::size_t count_outliers(const LabelVector& labels) {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::outlier));
}

NormalizeResult normalize_columns(const DataMatrix& x) {
    Eigen::MatrixXd v = x.values();
    std::vector<Index> zeros;
    for (Index j = 0; j < v.cols(); ++j) {
        const double n = v.col(j).norm();
        if (n == 0.0) {
            zeros.push_back(j);
            continue;
        }
        v.col(j) /= n;
    }
    return {DataMatrix(std::move(v), x.point_ids()), std::move(zeros)};
}

void SyntheticSpec::validate() const {
    if (ambient_dim <= 0 || num_subspaces <= 0 || subspace_dim <= 0 ||
        inliers_per_subspace <= 0 || num_outliers <= 0) {
        throw ConfigError("synthetic spec: all dimensions and counts must be positive");
    }
    if (subspace_dim >= ambient_dim) {
        throw ConfigError("synthetic spec: subspace dimension must be below ambient dimension");
    }
    if (!(noise_sigma >= 0.0)) {
        throw ConfigError("synthetic spec: noise_sigma must be >= 0");
    }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto gaussian = [&](Index rows, Index cols) {
        Eigen::MatrixXd m(rows, cols);
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r) m(r, c) = gauss(rng);
        return m;
    };

    const Index D = spec.ambient_dim;
    const Index inliers = spec.num_subspaces * spec.inliers_per_subspace;
    const Index n = inliers + spec.num_outliers;

    Eigen::MatrixXd raw(D, n);
    std::vector<int> raw_membership(static_cast<std::size_t>(n), -1);
    std::vector<Eigen::MatrixXd> bases;
    Index col = 0;
    for (Index k = 0; k < spec.num_subspaces; ++k) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(D, spec.subspace_dim));
        Eigen::MatrixXd basis =
            qr.householderQ() * Eigen::MatrixXd::Identity(D, spec.subspace_dim);
        for (Index i = 0; i < spec.inliers_per_subspace; ++i, ++col) {
            Eigen::VectorXd x = basis * gaussian(spec.subspace_dim, 1);
            x.normalize();
            if (spec.noise_sigma > 0.0) {
                x += spec.noise_sigma * gaussian(D, 1);
                x.normalize();
            }
            raw.col(col) = x;
            raw_membership[static_cast<std::size_t>(col)] = static_cast<int>(k);
        }
        bases.push_back(std::move(basis));
    }
    for (Index i = 0; i < spec.num_outliers; ++i, ++col) {
        raw.col(col) = gaussian(D, 1).normalized();
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);

    Eigen::MatrixXd values(D, n);
    LabelVector labels(static_cast<std::size_t>(n));
    std::vector<int> membership(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
        const auto src = order[static_cast<std::size_t>(j)];
        values.col(j) = raw.col(src);
        membership[static_cast<std::size_t>(j)] = raw_membership[static_cast<std::size_t>(src)];
        labels[static_cast<std::size_t>(j)] =
            membership[static_cast<std::size_t>(j)] < 0 ? Label::outlier : Label::inlier;
    }
    return {DataMatrix(std::move(values)), std::move(labels), std::move(bases),
            std::move(membership)};
}

} // namespace odcsr
