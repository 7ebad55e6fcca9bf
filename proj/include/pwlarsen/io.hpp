#pragma once
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <pwlarsen/error.hpp>
#include <pwlarsen/lars.hpp>
#include <pwlarsen/model.hpp>

#ifndef PWLARSEN_DATA_DIR
#define PWLARSEN_DATA_DIR "data"
#endif

namespace pwlarsen::io {

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view line, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& tok, std::size_t line, std::size_t col)
{
    double v = 0.0;
    const char* b = tok.data();
    const char* e = b + tok.size();
    if (!tok.empty() && *b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (tok.empty() || ec != std::errc() || ptr != e)
        throw ParseError(line, "column " + std::to_string(col) + ": '" + tok + "' is not a number");
    return v;
}

} // namespace detail

/// Column-labelled numeric table read from delimited text.
struct Table
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/**
 * Reads a delimited numeric table with a header row. Every data row must
 * have as many fields as the header. Blank lines are skipped.
 */
inline Table read_table(std::istream& in, char sep = ',')
{
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split(line, sep);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size())
            throw ParseError(lineno, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                         std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) row.push_back(detail::parse_double(fields[c], lineno, c + 1));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw ParseError(lineno, "missing header row");
    return t;
}

/// CSV dataset: header row, response in the first column, predictors after it.
struct LabelledDataset
{
    Dataset data;
    std::string response_name;
    std::vector<std::string> predictor_names;
};

inline LabelledDataset read_dataset_csv(std::istream& in)
{
    Table t = read_table(in, ',');
    if (t.header.size() < 2) throw ParseError(1, "need a response column and at least one predictor");
    if (t.rows.empty()) throw ParseError(2, "no data rows");
    const Index n = static_cast<Index>(t.rows.size());
    const Index p = static_cast<Index>(t.header.size() - 1);
    MatrixXd X(n, p);
    VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
        const auto& r = t.rows[static_cast<std::size_t>(i)];
        y[i] = r[0];
        for (Index j = 0; j < p; ++j) X(i, j) = r[static_cast<std::size_t>(j + 1)];
    }
    return {Dataset(std::move(X), std::move(y)), t.header[0],
            std::vector<std::string>(t.header.begin() + 1, t.header.end())};
}

inline LabelledDataset read_dataset_csv(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::DataFileMissing, "cannot open " + file.string());
    return read_dataset_csv(in);
}

inline void write_dataset_csv(std::ostream& out, const Dataset& d, const std::vector<std::string>& names = {})
{
    out << "y";
    for (Index j = 0; j < d.p(); ++j)
        out << ',' << (static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                                   : "x" + std::to_string(j + 1));
    out << '\n' << std::setprecision(17);
    for (Index i = 0; i < d.n(); ++i) {
        out << d.y()[i];
        for (Index j = 0; j < d.p(); ++j) out << ',' << d.X()(i, j);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Knot tables

/// One row of a knot table; predictor is 1-based, 0 for the End event.
struct KnotRow
{
    double alpha;
    std::size_t k;    // entry-counted index, or the preceding one for drops
    double lambda;
    std::string event;
    Index predictor;
    std::vector<double> beta;

    friend bool operator==(const KnotRow&, const KnotRow&) = default;
};

/**
 * Flattens a path into knot rows. Coefficients are reported on the raw
 * predictor scale unless standardized_scale is set.
 */
inline std::vector<KnotRow> knot_rows(const Dataset& d, const KnotPath& path, bool standardized_scale = false)
{
    std::vector<KnotRow> out;
    std::size_t k = 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const VectorXd b = standardized_scale ? path.betas[i] : to_original_scale(d, path.betas[i]);
        const KnotEvent& e = path.events[i];
        const std::size_t idx = e.counts_as_entry() ? k : (k == 0 ? 0 : k - 1);
        out.push_back({path.alpha, idx, path.knots[i], to_string(e),
                       e.type == EventType::End ? 0 : e.predictor + 1,
                       std::vector<double>(b.data(), b.data() + b.size())});
        if (e.counts_as_entry()) ++k;
    }
    return out;
}

inline void write_knot_rows_csv(std::ostream& out, const std::vector<KnotRow>& rows, std::size_t p)
{
    out << "alpha,k,lambda,event,predictor";
    for (std::size_t j = 0; j < p; ++j) out << ",beta_" << j + 1;
    out << '\n' << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.alpha << ',' << r.k << ',' << r.lambda << ',' << r.event << ',' << r.predictor;
        for (double b : r.beta) out << ',' << b;
        out << '\n';
    }
}

inline std::vector<KnotRow> read_knot_rows_csv(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;
    std::vector<KnotRow> rows;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        auto f = detail::split(line, ',');
        if (width == 0) {
            if (f.size() < 5 || f[0] != "alpha" || f[3] != "event")
                throw ParseError(lineno, "not a knot table header");
            width = f.size();
            continue;
        }
        if (f.size() != width)
            throw ParseError(lineno, "expected " + std::to_string(width) + " fields, found " + std::to_string(f.size()));
        if (f[3] != "enter" && f[3] != "drop" && f[3] != "end")
            throw ParseError(lineno, "unknown event '" + f[3] + "'");
        KnotRow r;
        r.alpha = detail::parse_double(f[0], lineno, 1);
        r.k = static_cast<std::size_t>(detail::parse_double(f[1], lineno, 2));
        r.lambda = detail::parse_double(f[2], lineno, 3);
        r.event = f[3];
        r.predictor = static_cast<Index>(detail::parse_double(f[4], lineno, 5));
        for (std::size_t c = 5; c < f.size(); ++c) r.beta.push_back(detail::parse_double(f[c], lineno, c + 1));
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Bundled prostate cancer data

/// FNV-1a 64 of the shipped prostate.data.
inline constexpr std::uint64_t prostate_checksum = 0x1800e247fc7d8263ULL;

inline std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::filesystem::path default_prostate_path()
{
    return std::filesystem::path(PWLARSEN_DATA_DIR) / "prostate.data";
}

inline const std::vector<std::string>& prostate_predictor_names()
{
    static const std::vector<std::string> names{"lcavol", "lweight", "age",     "lbph",
                                                "svi",    "lcp",     "gleason", "pgg45"};
    return names;
}

/// All 97 rows of the prostate file with the train flag.
struct ProstateTable
{
    MatrixXd X; // predictors in the order lcavol .. pgg45
    VectorXd y; // lpsa
    std::vector<bool> train;
};

inline ProstateTable read_prostate_table(const std::filesystem::path& file, bool verify_checksum = true)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorKind::DataFileMissing, "prostate data not found at " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    if (verify_checksum && fnv1a(bytes) != prostate_checksum)
        throw Error(ErrorKind::ChecksumMismatch, "prostate data file " + file.string() + " has been modified");

    std::istringstream lines(bytes);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::array<double, 9>> vals;
    ProstateTable t;
    bool header = true;
    while (std::getline(lines, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        auto f = detail::split(line, '\t');
        if (header) {
            if (f.size() != 11 || f[1] != "lcavol" || f[9] != "lpsa" || f[10] != "train")
                throw ParseError(lineno, "unexpected prostate header");
            header = false;
            continue;
        }
        if (f.size() != 11) throw ParseError(lineno, "expected 11 fields");
        std::array<double, 9> row{};
        for (std::size_t c = 0; c < 9; ++c) row[c] = detail::parse_double(f[c + 1], lineno, c + 2);
        if (f[10] != "T" && f[10] != "F") throw ParseError(lineno, "train flag must be T or F");
        vals.push_back(row);
        t.train.push_back(f[10] == "T");
    }
    const Index n = static_cast<Index>(vals.size());
    t.X.resize(n, 8);
    t.y.resize(n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < 8; ++j) t.X(i, j) = vals[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        t.y[i] = vals[static_cast<std::size_t>(i)][8];
    }
    return t;
}

/// The 67-row training subset: response log-PSA, predictors lcavol .. pgg45 (raw scale).
inline Dataset load_prostate(const std::filesystem::path& file = default_prostate_path())
{
    const ProstateTable t = read_prostate_table(file);
    std::vector<Index> rows;
    for (std::size_t i = 0; i < t.train.size(); ++i)
        if (t.train[i]) rows.push_back(static_cast<Index>(i));
    MatrixXd X(static_cast<Index>(rows.size()), 8);
    VectorXd y(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        X.row(static_cast<Index>(r)) = t.X.row(rows[r]);
        y[static_cast<Index>(r)] = t.y[rows[r]];
    }
    return Dataset(std::move(X), std::move(y));
}

/// Condition numbers (largest over smallest singular value) of one design under three scalings.
struct ConditionNumbers
{
    double raw;          // predictors as stored
    double centered;     // column means removed
    double standardized; // centered, unit-norm columns
};

inline ConditionNumbers condition_numbers(const MatrixXd& X)
{
    auto cond = [](const MatrixXd& A) {
        const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(A).singularValues();
        return sv[0] / sv[sv.size() - 1];
    };
    const MatrixXd Xc = X.rowwise() - X.colwise().mean();
    const MatrixXd Xs = Xc.array().rowwise() / Xc.colwise().norm().array();
    return {cond(X), cond(Xc), cond(Xs)};
}

/// Pearson correlation matrix of the columns of X.
inline MatrixXd correlation_matrix(const MatrixXd& X)
{
    const MatrixXd Xc = X.rowwise() - X.colwise().mean();
    const VectorXd norms = Xc.colwise().norm().transpose();
    return (Xc.transpose() * Xc).array() / (norms * norms.transpose()).array();
}

/// Collinearity summary of the prostate predictors for the training rows and for all rows.
struct ProstateDiagnostics
{
    MatrixXd corr_train;
    MatrixXd corr_full;
    ConditionNumbers cond_train;
    ConditionNumbers cond_full;
};

inline ProstateDiagnostics prostate_diagnostics(const std::filesystem::path& file = default_prostate_path())
{
    const ProstateTable t = read_prostate_table(file);
    const MatrixXd train = load_prostate(file).X();
    return {correlation_matrix(train), correlation_matrix(t.X), condition_numbers(train), condition_numbers(t.X)};
}

} // namespace pwlarsen::io
