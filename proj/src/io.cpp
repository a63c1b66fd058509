#include "adaprune/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace adaprune::io {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line,
                       const std::string& message) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + message);
}

double parse_double(const std::string& text, const std::filesystem::path& path,
                    std::size_t line) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        fail(path, line, "expected a numeric value, got '" + text + "'");
    }
    if (!std::isfinite(value)) {
        fail(path, line, "non-finite value '" + text + "'");
    }
    return value;
}

long long parse_int(const std::string& text, const std::filesystem::path& path,
                    std::size_t line) {
    long long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        fail(path, line, "expected an integer, got '" + text + "'");
    }
    return value;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path.string() + ": cannot open for reading");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    // A trailing blank line from the final LF is not a record.
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error(tmp.string() + ": cannot open for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error(tmp.string() + ": write failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error(path.string() + ": rename failed: " + ec.message());
    }
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) fail(path, 1, "missing header");

    const std::vector<std::string> header = split_csv(lines[0]);
    std::size_t first_feature = 0;
    bool has_labels = false;
    if (!header.empty() && header[0] == "label") {
        has_labels = true;
        first_feature = 1;
    }
    const std::size_t d = header.size() - first_feature;
    if (d == 0) fail(path, 1, "header declares no feature columns");
    for (std::size_t j = 0; j < d; ++j) {
        const std::string expected = "f" + std::to_string(j);
        if (header[first_feature + j] != expected) {
            fail(path, 1, "expected feature column '" + expected + "', got '" +
                              header[first_feature + j] + "'");
        }
    }

    const std::size_t n = lines.size() - 1;
    if (n == 0) fail(path, 2, "no data rows");
    RowMatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<int> labels;
    labels.reserve(has_labels ? n : 0);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t line_no = r + 2;
        const std::vector<std::string> fields = split_csv(lines[r + 1]);
        if (fields.size() != header.size()) {
            fail(path, line_no,
                 "expected " + std::to_string(header.size()) + " fields, got " +
                     std::to_string(fields.size()));
        }
        if (has_labels) {
            labels.push_back(
                static_cast<int>(parse_int(fields[0], path, line_no)));
        }
        for (std::size_t j = 0; j < d; ++j) {
            data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                parse_double(fields[first_feature + j], path, line_no);
        }
    }
    if (has_labels) return EmbeddingSet(std::move(data), std::move(labels));
    return EmbeddingSet(std::move(data));
}

void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingSet& set) {
    std::ostringstream out;
    if (set.has_labels()) out << "label,";
    for (Eigen::Index j = 0; j < set.cols(); ++j) {
        out << (j > 0 ? "," : "") << "f" << j;
    }
    out << "\n";
    for (Eigen::Index i = 0; i < set.rows(); ++i) {
        if (set.has_labels()) {
            out << set.labels()[static_cast<std::size_t>(i)] << ",";
        }
        for (Eigen::Index j = 0; j < set.cols(); ++j) {
            out << (j > 0 ? "," : "") << format_double(set.data()(i, j));
        }
        out << "\n";
    }
    atomic_write(path, out.str());
}

PruneMask load_mask(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty() || lines[0] != "keep") {
        fail(path, 1, "expected header 'keep'");
    }
    if (lines.size() < 2) fail(path, 2, "no data rows");
    PruneMask mask;
    mask.bits.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r] == "0") {
            mask.bits.push_back(0);
        } else if (lines[r] == "1") {
            mask.bits.push_back(1);
        } else {
            fail(path, r + 1, "expected 0 or 1, got '" + lines[r] + "'");
        }
    }
    return mask;
}

void write_mask(const std::filesystem::path& path, const PruneMask& mask,
                std::ptrdiff_t expected_rows) {
    if (expected_rows >= 0 &&
        mask.size() != static_cast<std::size_t>(expected_rows)) {
        throw std::invalid_argument(
            "mask length does not match the declared source row count");
    }
    std::ostringstream out;
    out << "keep\n";
    for (const auto bit : mask.bits) {
        out << (bit ? "1" : "0") << "\n";
    }
    atomic_write(path, out.str());
}

Eigen::VectorXd load_weights(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty() || lines[0] != "weight") {
        fail(path, 1, "expected header 'weight'");
    }
    if (lines.size() < 2) fail(path, 2, "no data rows");
    Eigen::VectorXd weights(static_cast<Eigen::Index>(lines.size() - 1));
    for (std::size_t r = 1; r < lines.size(); ++r) {
        weights(static_cast<Eigen::Index>(r - 1)) =
            parse_double(lines[r], path, r + 1);
    }
    return weights;
}

void write_weights(const std::filesystem::path& path,
                   const Eigen::VectorXd& weights) {
    std::ostringstream out;
    out << "weight\n";
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        out << format_double(weights(i)) << "\n";
    }
    atomic_write(path, out.str());
}

void write_sweep(const std::filesystem::path& path, const SweepResult& sweep) {
    std::ostringstream out;
    out << "ratio,seed,mmd,accuracy\n";
    for (const SweepRow& row : sweep.rows) {
        out << format_double(row.ratio) << "," << row.seed << ","
            << format_double(row.mmd) << "," << format_double(row.accuracy)
            << "\n";
    }
    atomic_write(path, out.str());

    std::ostringstream stats;
    stats << "r,p,n\n";
    if (sweep.correlation.has_value()) {
        stats << format_double(sweep.correlation->r) << ","
              << format_double(sweep.correlation->p) << "," << sweep.rows.size()
              << "\n";
    } else {
        stats << "nan,nan," << sweep.rows.size() << "\n";
    }
    atomic_write(path.string() + ".stats", stats.str());
}

}  // namespace adaprune::io
