#pragma once

#include "adaprune/eval.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace adaprune::io {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Embedding CSV: header `f0,...,f{d-1}` with an optional leading `label`
/// column of integers; one row per example; LF or CRLF input accepted.
/// Throws ParseError naming the offending line on malformed input.
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingSet& set);

/// Mask CSV: header `keep`, one 0/1 per source row in input order. When
/// expected_rows is nonnegative, a mask of any other length is refused.
PruneMask load_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const PruneMask& mask,
                std::ptrdiff_t expected_rows = -1);

/// Weights CSV: header `weight`, one value per source row in input order.
Eigen::VectorXd load_weights(const std::filesystem::path& path);
void write_weights(const std::filesystem::path& path,
                   const Eigen::VectorXd& weights);

/// Sweep CSV: header `ratio,seed,mmd,accuracy`, rows sorted by (ratio, seed).
/// The sidecar (same path + ".stats") carries one `r,p,n` row.
void write_sweep(const std::filesystem::path& path, const SweepResult& sweep);

/// Formats a double with 17 significant digits (shortest round-trip safe).
std::string format_double(double value);

/// Writes atomically: content goes to a temporary file in the destination
/// directory which is renamed over `path` on success, so failed writes never
/// leave partial output behind.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace adaprune::io
