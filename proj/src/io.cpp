#include "odcsr/io.hpp"
#include "odcsr/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace odcsr {

namespace {

constexpr std::array<char, 4> kMatrixMagic{'O', 'D', 'C', 'M'};
constexpr std::array<char, 4> kCoeffMagic{'O', 'D', 'C', 'C'};
constexpr std::uint32_t kMatrixVersion = 1;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view cell, const fs::path& path, std::size_t line_no) {
    double v = 0.0;
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" +
                         std::string(cell) + "'");
    }
    return v;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

template <class T>
void put_le(std::ostream& os, T value) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    const U bits = std::bit_cast<U>(value);
    std::array<char, sizeof(U)> bytes;
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    os.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& is, const fs::path& path) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    std::array<unsigned char, sizeof(U)> bytes;
    if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
        throw ParseError(path.string() + ": truncated binary file");
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= U(bytes[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

void check_magic(std::istream& is, const std::array<char, 4>& magic, const fs::path& path) {
    std::array<char, 4> got{};
    if (!is.read(got.data(), got.size()) || got != magic) {
        throw ParseError(path.string() + ": bad magic, expected " + std::string(magic.data(), 4));
    }
}

DataMatrix load_csv(const fs::path& path, bool points_as_rows, CsvOptions csv) {
    auto in = open_in(path);
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line, ',');
        if (csv.header && header.empty() && rows.empty()) {
            for (auto c : cells) header.emplace_back(c);
            continue;
        }
        if (rows.empty()) {
            width = cells.size();
        } else if (cells.size() != width) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(width) + " cells, got " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (auto c : cells) row.push_back(parse_double(c, path, line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path.string() + ": no data rows");

    const Index r = Index(rows.size()), c = Index(width);
    Eigen::MatrixXd values = points_as_rows ? Eigen::MatrixXd(c, r) : Eigen::MatrixXd(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) {
            const double v = rows[std::size_t(i)][std::size_t(j)];
            if (points_as_rows) values(j, i) = v;
            else values(i, j) = v;
        }
    std::vector<std::string> ids;
    if (!points_as_rows && !header.empty()) {
        if (header.size() != width) throw ParseError(path.string() + ": header width mismatch");
        ids = std::move(header);
    }
    return DataMatrix(std::move(values), std::move(ids));
}

DataMatrix load_binary(const fs::path& path, bool points_as_rows) {
    auto in = open_in(path, std::ios::binary);
    check_magic(in, kMatrixMagic, path);
    const auto version = get_le<std::uint32_t>(in, path);
    if (version != kMatrixVersion) {
        throw ParseError(path.string() + ": unsupported version " + std::to_string(version));
    }
    const auto rows = get_le<std::uint64_t>(in, path);
    const auto cols = get_le<std::uint64_t>(in, path);
    Eigen::MatrixXd file{Index(rows), Index(cols)};
    for (std::uint64_t i = 0; i < rows; ++i)
        for (std::uint64_t j = 0; j < cols; ++j) file(Index(i), Index(j)) = get_le<double>(in, path);
    if (points_as_rows) return DataMatrix(file.transpose());
    return DataMatrix(std::move(file));
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

MatrixFormat format_from_path(const fs::path& path) {
    const auto ext = path.extension().string();
    return ext == ".bin" || ext == ".odcm" ? MatrixFormat::binary : MatrixFormat::csv;
}

MatrixFormat parse_format(std::string_view text) {
    if (text == "csv") return MatrixFormat::csv;
    if (text == "bin" || text == "binary") return MatrixFormat::binary;
    throw ConfigError("unknown matrix format: " + std::string(text));
}

DataMatrix load_matrix(const fs::path& path, MatrixFormat format, bool points_as_rows,
                       CsvOptions csv) {
    return format == MatrixFormat::csv ? load_csv(path, points_as_rows, csv)
                                       : load_binary(path, points_as_rows);
}

void save_matrix(const fs::path& path, MatrixFormat format, const Eigen::MatrixXd& values,
                 bool points_as_rows) {
    const Eigen::MatrixXd file = points_as_rows ? Eigen::MatrixXd(values.transpose()) : values;
    if (format == MatrixFormat::csv) {
        auto out = open_out(path);
        for (Index i = 0; i < file.rows(); ++i) {
            for (Index j = 0; j < file.cols(); ++j) {
                if (j) out << ',';
                out << format_double(file(i, j));
            }
            out << '\n';
        }
        if (!out) throw IoError("write failed: " + path.string());
        return;
    }
    auto out = open_out(path, std::ios::binary);
    out.write(kMatrixMagic.data(), kMatrixMagic.size());
    put_le(out, kMatrixVersion);
    put_le(out, std::uint64_t(file.rows()));
    put_le(out, std::uint64_t(file.cols()));
    for (Index i = 0; i < file.rows(); ++i)
        for (Index j = 0; j < file.cols(); ++j) put_le(out, file(i, j));
    if (!out) throw IoError("write failed: " + path.string());
}

LabelVector load_labels(const fs::path& path) {
    auto in = open_in(path);
    LabelVector labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tok = trim(line);
        if (tok.empty()) continue;
        if (tok == "0") labels.push_back(Label::inlier);
        else if (tok == "1") labels.push_back(Label::outlier);
        else throw ParseError(path.string() + ":" + std::to_string(line_no) + ": label must be 0 or 1");
    }
    return labels;
}

void save_labels(const fs::path& path, const LabelVector& labels) {
    auto out = open_out(path);
    for (auto l : labels) out << (l == Label::outlier ? '1' : '0') << '\n';
}

void save_scores(const fs::path& path, const Eigen::VectorXd& scores,
                 const std::vector<std::string>& ids) {
    if (!ids.empty() && Index(ids.size()) != scores.size()) {
        throw DimensionError("score id count mismatch");
    }
    auto out = open_out(path);
    for (Index i = 0; i < scores.size(); ++i) {
        out << (ids.empty() ? std::to_string(i) : ids[std::size_t(i)]) << ','
            << format_double(scores[i]) << '\n';
    }
}

std::pair<std::vector<std::string>, Eigen::VectorXd> load_scores(const fs::path& path) {
    auto in = open_in(path);
    std::vector<std::string> ids;
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto pos = line.rfind(',');
        if (pos == std::string::npos) throw ParseError(path.string() + ": expected id,score");
        ids.emplace_back(trim(std::string_view(line).substr(0, pos)));
        values.push_back(parse_double(trim(std::string_view(line).substr(pos + 1)), path, line_no));
    }
    return {std::move(ids), Eigen::Map<Eigen::VectorXd>(values.data(), Index(values.size()))};
}

void save_coefficients(const fs::path& path, const SparseMatrix& coeffs) {
    if (coeffs.rows() != coeffs.cols()) throw DimensionError("coefficient matrix must be square");
    SparseMatrix c = coeffs;
    c.makeCompressed();
    auto out = open_out(path, std::ios::binary);
    out.write(kCoeffMagic.data(), kCoeffMagic.size());
    put_le(out, std::uint64_t(c.cols()));
    put_le(out, std::uint64_t(c.nonZeros()));
    // Column-major storage already iterates in (col, row) order.
    for (Index j = 0; j < c.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(c, j); it; ++it) {
            put_le(out, std::uint64_t(it.row()));
            put_le(out, std::uint64_t(it.col()));
            put_le(out, it.value());
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

SparseMatrix load_coefficients(const fs::path& path) {
    auto in = open_in(path, std::ios::binary);
    check_magic(in, kCoeffMagic, path);
    const auto n = get_le<std::uint64_t>(in, path);
    const auto nnz = get_le<std::uint64_t>(in, path);
    std::vector<Eigen::Triplet<double, Index>> triplets;
    triplets.reserve(std::size_t(nnz));
    for (std::uint64_t k = 0; k < nnz; ++k) {
        const auto r = get_le<std::uint64_t>(in, path);
        const auto c = get_le<std::uint64_t>(in, path);
        const auto v = get_le<double>(in, path);
        if (r >= n || c >= n) throw ParseError(path.string() + ": triplet index out of range");
        triplets.emplace_back(Index(r), Index(c), v);
    }
    SparseMatrix m{Index(n), Index(n)};
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

void Manifest::set(std::string key, std::string value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(key), std::move(value));
}

void Manifest::set(std::string key, double value) { set(std::move(key), format_double(value)); }
void Manifest::set(std::string key, long long value) { set(std::move(key), std::to_string(value)); }

bool Manifest::has(std::string_view key) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const std::string& Manifest::get(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    throw ConfigError("manifest is missing key '" + std::string(key) + "'");
}

double Manifest::get_double(std::string_view key) const {
    return parse_double(get(key), "manifest", 0);
}

long long Manifest::get_int(std::string_view key) const {
    const auto& v = get(key);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError("manifest key '" + std::string(key) + "' is not an integer");
    }
    return out;
}

bool Manifest::get_bool(std::string_view key) const {
    const auto& v = get(key);
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw ConfigError("manifest key '" + std::string(key) + "' is not a boolean");
}

void Manifest::append(const Manifest& other) {
    for (const auto& [k, v] : other.entries_) set(k, v);
}

std::string Manifest::to_string() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
    return out;
}

Manifest Manifest::parse(const std::string& text) {
    Manifest m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto pos = t.find('=');
        if (pos == std::string_view::npos) throw ParseError("manifest line without '=': " + line);
        m.set(std::string(trim(t.substr(0, pos))), std::string(trim(t.substr(pos + 1))));
    }
    return m;
}

void Manifest::save(const fs::path& path) const {
    auto out = open_out(path);
    out << to_string();
}

Manifest Manifest::load(const fs::path& path) {
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void write_config(Manifest& m, const CascadeConfig& cfg) {
    m.set("stages", cfg.num_stages);
    m.set("walk_steps", cfg.walk_steps);
    m.set("lambda", cfg.en_config.lambda);
    if (const auto* f = std::get_if<FixedGamma>(&cfg.en_config.gamma_mode)) {
        m.set("gamma_mode", std::string("fixed"));
        m.set("gamma", f->gamma);
    } else {
        m.set("gamma_mode", std::string("relative"));
        m.set("alpha", std::get<RelativeGamma>(cfg.en_config.gamma_mode).alpha);
    }
    m.set("max_iters", cfg.en_config.max_iters);
    m.set("tol", cfg.en_config.tol);
    if (const auto* w = std::get_if<WeightedFusion>(&cfg.fusion)) {
        m.set("fusion", std::string("weighted"));
        std::string joined;
        for (std::size_t i = 0; i < w->weights.size(); ++i) {
            if (i) joined += ';';
            joined += format_double(w->weights[i]);
        }
        m.set("fusion_weights", joined);
    } else {
        m.set("fusion", std::string("mean"));
    }
    m.set("renormalize_residuals", cfg.renormalize_residuals);
}

CascadeConfig read_config(const Manifest& m) {
    CascadeConfig cfg;
    cfg.num_stages = int(m.get_int("stages"));
    cfg.walk_steps = int(m.get_int("walk_steps"));
    cfg.en_config.lambda = m.get_double("lambda");
    const auto& mode = m.get("gamma_mode");
    if (mode == "fixed") cfg.en_config.gamma_mode = FixedGamma{m.get_double("gamma")};
    else if (mode == "relative") cfg.en_config.gamma_mode = RelativeGamma{m.get_double("alpha")};
    else throw ConfigError("unknown gamma_mode: " + mode);
    cfg.en_config.max_iters = int(m.get_int("max_iters"));
    cfg.en_config.tol = m.get_double("tol");
    const auto& fusion = m.get("fusion");
    if (fusion == "weighted") {
        WeightedFusion w;
        for (auto tok : split(m.get("fusion_weights"), ';')) {
            w.weights.push_back(parse_double(tok, "manifest", 0));
        }
        cfg.fusion = std::move(w);
    } else if (fusion == "mean") {
        cfg.fusion = UniformMeanFusion{};
    } else {
        throw ConfigError("unknown fusion: " + fusion);
    }
    cfg.renormalize_residuals = m.get_bool("renormalize_residuals");
    cfg.validate();
    return cfg;
}

void write_cascade_result(const fs::path& dir, const CascadeResult& result,
                          const std::vector<std::string>& ids, const Manifest& extra) {
    fs::create_directories(dir);
    Manifest m = extra;
    write_config(m, result.config);
    m.set("polarity", std::string(to_string(Polarity::low_is_outlier)));
    for (std::size_t i = 0; i < result.stages.size(); ++i) {
        const auto& s = result.stages[i];
        const std::string prefix = "stage_" + std::to_string(i + 1);
        save_coefficients(dir / (prefix + "_coeffs.odcc"), s.representation.coeffs);
        save_scores(dir / (prefix + "_scores.csv"), s.scores.probs(), ids);
        m.set(prefix + ".residual_norm", s.residual_norm);
        m.set(prefix + ".nnz", static_cast<long long>(s.representation.coeffs.nonZeros()));
        m.set(prefix + ".nonconverged", static_cast<long long>(s.representation.nonconverged.size()));
        m.set(prefix + ".short_circuited", s.short_circuited);
        m.set(prefix + ".seconds", s.seconds);
    }
    save_scores(dir / "fused_scores.csv", result.fused.probs(), ids);
    m.save(dir / "manifest.txt");
}

} // namespace odcsr
