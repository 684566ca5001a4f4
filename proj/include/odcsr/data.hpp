#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace odcsr {

using Index = Eigen::Index;

/// Dataset stored with one point per column (D rows, N columns).
///
/// Entries must be finite and there must be at least two points, otherwise
/// the zero-diagonal self-representation is vacuous.
class DataMatrix {
public:
    explicit DataMatrix(Eigen::MatrixXd values, std::vector<std::string> point_ids = {});

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    Index dim() const noexcept { return values_.rows(); }
    Index num_points() const noexcept { return values_.cols(); }

    const std::vector<std::string>& point_ids() const noexcept { return ids_; }
    bool has_ids() const noexcept { return !ids_.empty(); }
    /// The supplied identifier, or the zero-based column index as text.
    std::string id(Index j) const;

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> ids_;
};

enum class Label : std::uint8_t { inlier = 0, outlier = 1 };
using LabelVector = std::vector<Label>;

std::size_t count_outliers(const LabelVector& labels);

struct NormalizeResult {
    DataMatrix data;
    /// Columns with zero norm; they are left untouched.
    std::vector<Index> zero_columns;
};

/// Scale every nonzero column to unit Euclidean norm.
NormalizeResult normalize_columns(const DataMatrix& x);

/// Union-of-subspaces generator used for desk-scale experiments.
struct SyntheticSpec {
    Index ambient_dim = 50;
    Index num_subspaces = 3;
    Index subspace_dim = 4;
    Index inliers_per_subspace = 64;
    Index num_outliers = 34;
    double noise_sigma = 0.0;
    std::uint64_t rng_seed = 1;

    /// Throws ConfigError when d >= D, a count is not positive, or sigma < 0.
    void validate() const;
};

struct SyntheticData {
    DataMatrix data;
    LabelVector labels;
    /// Orthonormal D x d basis per subspace.
    std::vector<Eigen::MatrixXd> bases;
    /// Generating subspace per column, -1 for outliers.
    std::vector<int> membership;
};

/// Deterministic in rng_seed. Columns are shuffled so outliers are not
/// grouped at the end.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

} // namespace odcsr
