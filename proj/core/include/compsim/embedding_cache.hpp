#pragma once

// Binary embedding cache. Layout (all integers little-endian):
//
//   offset  size  field
//   0       8     magic "CSEMBED\0"
//   8       4     format version (1)
//   12      4     bytes per value: 4 (IEEE float32) or 8 (IEEE float64)
//   16      4     context budget (tokens)
//   20      4     dimension
//   24      8     row count
//   32      4     provider_id length L
//   36      L     provider_id bytes (UTF-8)
//   36+L    ...   count * dimension values, row-major, little-endian
//
// Row ids live in a sidecar "<path>.ids" with one id per line, in row order.

#include <string>

#include "compsim/embed.hpp"

namespace compsim {

enum class CachePrecision { Float32 = 4, Float64 = 8 };

inline constexpr std::uint32_t kCacheVersion = 1;

void save_embeddings(const EmbeddingMatrix& matrix, const std::string& path,
                     CachePrecision precision = CachePrecision::Float32);

EmbeddingMatrix load_embeddings(const std::string& path);

/// Adds rows to an existing cache (or creates it). Provider, budget,
/// dimension and precision must match; a repeated company_id is an error.
void append_embeddings(const EmbeddingMatrix& rows, const std::string& path,
                       CachePrecision precision = CachePrecision::Float32);

/// Rounds every entry to the given storage precision.
EmbeddingMatrix quantize(const EmbeddingMatrix& matrix, CachePrecision precision);

/// One JSON object per line: {"company_id", "provider_id", "context_budget", "vector"}.
void export_embeddings_jsonl(const EmbeddingMatrix& matrix, const std::string& path);
EmbeddingMatrix import_embeddings_jsonl(const std::string& path);

std::string ids_sidecar_path(const std::string& path);

} // namespace compsim
