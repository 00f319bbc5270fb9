#pragma once

// Embedding providers, chunk-average pooling and the embedding matrix.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "compsim/textprep.hpp"

namespace compsim {

/// Raised by embed_document when the provider fails on one chunk.
class ProviderError : public std::runtime_error {
public:
  ProviderError(std::size_t chunk_index, const std::string& what)
      : std::runtime_error("chunk " + std::to_string(chunk_index) + ": " + what),
        chunk_index_(chunk_index) {}
  std::size_t chunk_index() const { return chunk_index_; }

private:
  std::size_t chunk_index_;
};

struct EmbeddingProviderSpec {
  std::string provider_id;  // "hash-bow", "tfidf-rp", "remote"
  std::size_t dimension = 0;
  std::map<std::string, std::string> params;
};

/// A provider maps one token chunk to a fixed-dimension vector. Providers
/// are immutable after construction and safe for concurrent use.
class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;
  virtual const std::string& id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Eigen::VectorXd embed_chunk(const TokenSequence& chunk) const = 0;
  /// Batch form; remote providers override this to make one request.
  virtual std::vector<Eigen::VectorXd> embed_chunks(std::span<const TokenSequence> chunks) const;
};

enum class Pooling { Equal, LengthWeighted };

/// Mean of the per-chunk provider vectors, accumulated in double.
Eigen::VectorXd embed_document(const EmbeddingProvider& provider,
                               std::span<const TokenSequence> chunks,
                               Pooling pooling = Pooling::Equal);

// ---------------------------------------------------------------------------
// hash-bow: signed feature hashing of token counts.
//
//   h     = FNV-1a-64(token bytes)
//   key   = mix64(h ^ mix64(seed))
//   index = key mod d
//   sign  = +1 if (mix64(key) & 1) == 0 else -1
//
// The count vector sum(sign * e_index) is L2-normalized unless it is zero.

std::uint64_t fnv1a64(std::string_view bytes);

struct HashSlot {
  std::size_t index;
  double sign;
};
HashSlot hash_slot(std::string_view token, std::size_t dimension, std::uint64_t seed);

Eigen::VectorXd hash_bow_embed(const TokenSequence& chunk, std::size_t dimension, std::uint64_t seed);

class HashBowProvider final : public EmbeddingProvider {
public:
  HashBowProvider(std::size_t dimension, std::uint64_t seed);
  const std::string& id() const override { return id_; }
  std::size_t dimension() const override { return dimension_; }
  Eigen::VectorXd embed_chunk(const TokenSequence& chunk) const override;

private:
  std::string id_ = "hash-bow";
  std::size_t dimension_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// TF-IDF with optional Gaussian random projection.

struct TfidfModel {
  std::vector<std::string> vocabulary;  // df descending, ties lexicographic
  Eigen::VectorXd idf;                  // ln((1 + N) / (1 + df)) + 1
  std::vector<std::size_t> document_frequency;
  std::size_t n_documents = 0;

  std::optional<std::size_t> index_of(const std::string& token) const;
  void rebuild_index();

private:
  std::unordered_map<std::string, std::size_t> index_;
};

TfidfModel tfidf_fit(std::span<const TokenSequence> documents, std::size_t max_features);

struct Projection {
  std::size_t dimension;
  std::uint64_t seed;
};

/// dimension x vocabulary matrix of N(0, 1) entries drawn row by row.
Eigen::MatrixXd gaussian_projection(std::size_t dimension, std::size_t input_dimension,
                                    std::uint64_t seed);

Eigen::VectorXd tfidf_embed(const TfidfModel& model, const TokenSequence& chunk,
                            std::optional<Projection> projection = std::nullopt);

class TfidfProvider final : public EmbeddingProvider {
public:
  TfidfProvider(TfidfModel model, std::optional<Projection> projection);
  const std::string& id() const override { return id_; }
  std::size_t dimension() const override;
  Eigen::VectorXd embed_chunk(const TokenSequence& chunk) const override;
  const TfidfModel& model() const { return model_; }

private:
  std::string id_ = "tfidf-rp";
  TfidfModel model_;
  std::optional<Projection> projection_;
  Eigen::MatrixXd matrix_;
};

// ---------------------------------------------------------------------------

struct DocumentEmbedding {
  std::string company_id;
  std::string provider_id;
  std::size_t context_budget = 0;
  Eigen::VectorXd vector;
};

/// Row-per-company matrix for one provider and context budget.
class EmbeddingMatrix {
public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::string provider_id, std::size_t context_budget, std::vector<std::string> ids,
                  Eigen::MatrixXd vectors);

  const std::string& provider_id() const { return provider_id_; }
  std::size_t context_budget() const { return context_budget_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(vectors_.cols()); }

  std::optional<std::size_t> index_of(const std::string& id) const;
  Eigen::VectorXd row(const std::string& id) const;

  /// Rows restricted to `ids` (in that order); unknown ids throw.
  EmbeddingMatrix subset(std::span<const std::string> ids) const;
  /// Rows sorted by company id.
  EmbeddingMatrix sorted() const;

  bool operator==(const EmbeddingMatrix& other) const;

private:
  std::string provider_id_;
  std::size_t context_budget_ = 0;
  std::vector<std::string> ids_;
  Eigen::MatrixXd vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

} // namespace compsim
