#pragma once

#include "odcsr/cascade.hpp"
#include "odcsr/data.hpp"
#include "odcsr/elastic_net.hpp"
#include "odcsr/evaluation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace odcsr {

namespace fs = std::filesystem;

enum class MatrixFormat { csv, binary };

/// ".bin" and ".odcm" are binary, anything else CSV.
MatrixFormat format_from_path(const fs::path& path);
MatrixFormat parse_format(std::string_view text);

struct CsvOptions {
    /// Skip (and, for column-point layouts, use as point ids) the first row.
    bool header = false;
};

/// Reads a matrix file. With points_as_rows set, each file row is a point and
/// the matrix is transposed into the column-per-point layout.
DataMatrix load_matrix(const fs::path& path, MatrixFormat format, bool points_as_rows,
                       CsvOptions csv = {});

/// Writes a matrix in the same layout load_matrix expects. Binary files hold
/// "ODCM", u32 version 1, u64 rows, u64 cols, then row-major little-endian f64.
void save_matrix(const fs::path& path, MatrixFormat format, const Eigen::MatrixXd& values,
                 bool points_as_rows);

/// One token per line: 0 inlier, 1 outlier.
LabelVector load_labels(const fs::path& path);
void save_labels(const fs::path& path, const LabelVector& labels);

/// "id,score" per line, no header.
void save_scores(const fs::path& path, const Eigen::VectorXd& scores,
                 const std::vector<std::string>& ids = {});
std::pair<std::vector<std::string>, Eigen::VectorXd> load_scores(const fs::path& path);

/// "ODCC", u64 N, u64 nnz, then (u64 row, u64 col, f64 value) sorted by (col, row).
void save_coefficients(const fs::path& path, const SparseMatrix& coeffs);
SparseMatrix load_coefficients(const fs::path& path);

/// Ordered key-value store written as "key=value" lines.
class Manifest {
public:
    void set(std::string key, std::string value);
    void set(std::string key, double value);
    void set(std::string key, long long value);
    void set(std::string key, int value) { set(std::move(key), static_cast<long long>(value)); }
    void set(std::string key, bool value) { set(std::move(key), std::string(value ? "1" : "0")); }

    bool has(std::string_view key) const;
    const std::string& get(std::string_view key) const;
    double get_double(std::string_view key) const;
    long long get_int(std::string_view key) const;
    bool get_bool(std::string_view key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
        return entries_;
    }
    void append(const Manifest& other);

    std::string to_string() const;
    static Manifest parse(const std::string& text);
    void save(const fs::path& path) const;
    static Manifest load(const fs::path& path);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double v);

void write_config(Manifest& m, const CascadeConfig& cfg);
CascadeConfig read_config(const Manifest& m);

/// Writes per-stage coefficient and score files, fused scores and
/// manifest.txt (extra entries, config, then per-stage statistics).
void write_cascade_result(const fs::path& dir, const CascadeResult& result,
                          const std::vector<std::string>& ids, const Manifest& extra = {});

} // namespace odcsr
