#include "compsim/embed.hpp"

#include <algorithm>
#include <cmath>

#include "compsim/error.hpp"
#include "compsim/random.hpp"

namespace compsim {

std::vector<Eigen::VectorXd> EmbeddingProvider::embed_chunks(
    std::span<const TokenSequence> chunks) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    try {
      out.push_back(embed_chunk(chunks[i]));
    } catch (const ProviderError&) {
      throw;
    } catch (const std::exception& e) {
      throw ProviderError(i, e.what());
    }
  }
  return out;
}

Eigen::VectorXd embed_document(const EmbeddingProvider& provider,
                               std::span<const TokenSequence> chunks, Pooling pooling) {
  if (chunks.empty()) throw ArgumentError("embed_document: empty chunk list");
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (chunks[i].empty()) throw ArgumentError("embed_document: chunk " + std::to_string(i) + " is empty");
  }
  const auto vectors = provider.embed_chunks(chunks);
  if (vectors.size() != chunks.size()) {
    throw ProviderError(vectors.size(), "provider returned " + std::to_string(vectors.size()) +
                                            " vectors for " + std::to_string(chunks.size()) + " chunks");
  }
  const auto d = static_cast<Eigen::Index>(provider.dimension());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != d) {
      throw ProviderError(i, "dimension " + std::to_string(vectors[i].size()) + " != " +
                                 std::to_string(d));
    }
    if (!vectors[i].allFinite()) throw ProviderError(i, "non-finite embedding");
    const double w = pooling == Pooling::Equal ? 1.0 : static_cast<double>(chunks[i].size());
    sum += w * vectors[i];
    total_weight += w;
  }
  return sum / total_weight;
}

// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

HashSlot hash_slot(std::string_view token, std::size_t dimension, std::uint64_t seed) {
  const std::uint64_t key = mix64(fnv1a64(token) ^ mix64(seed));
  return {static_cast<std::size_t>(key % dimension), (mix64(key) & 1U) == 0 ? 1.0 : -1.0};
}

Eigen::VectorXd hash_bow_embed(const TokenSequence& chunk, std::size_t dimension, std::uint64_t seed) {
  if (dimension < 2) throw ArgumentError("hash-bow dimension must be >= 2");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension));
  for (const auto& token : chunk.tokens) {
    const auto slot = hash_slot(token, dimension, seed);
    v[static_cast<Eigen::Index>(slot.index)] += slot.sign;
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

HashBowProvider::HashBowProvider(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension < 2) throw ArgumentError("hash-bow dimension must be >= 2");
}

Eigen::VectorXd HashBowProvider::embed_chunk(const TokenSequence& chunk) const {
  return hash_bow_embed(chunk, dimension_, seed_);
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> TfidfModel::index_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void TfidfModel::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < vocabulary.size(); ++i) index_.emplace(vocabulary[i], i);
}

TfidfModel tfidf_fit(std::span<const TokenSequence> documents, std::size_t max_features) {
  if (documents.size() < 2) throw ArgumentError("tfidf_fit: need at least 2 documents");
  if (max_features < 1) throw ArgumentError("tfidf_fit: max_features must be >= 1");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    std::vector<std::string> unique(doc.tokens.begin(), doc.tokens.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto& t : unique) ++df[std::move(t)];
  }
  if (df.empty()) throw ArgumentError("tfidf_fit: corpus has no tokens");
  std::vector<std::pair<std::string, std::size_t>> terms(df.begin(), df.end());
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (terms.size() > max_features) terms.resize(max_features);

  TfidfModel model;
  model.n_documents = documents.size();
  model.idf.resize(static_cast<Eigen::Index>(terms.size()));
  const double n = static_cast<double>(documents.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    model.vocabulary.push_back(terms[i].first);
    model.document_frequency.push_back(terms[i].second);
    model.idf[static_cast<Eigen::Index>(i)] =
        std::log((1.0 + n) / (1.0 + static_cast<double>(terms[i].second))) + 1.0;
  }
  model.rebuild_index();
  return model;
}

Eigen::MatrixXd gaussian_projection(std::size_t dimension, std::size_t input_dimension,
                                    std::uint64_t seed) {
  if (dimension < 1) throw ArgumentError("projection dimension must be >= 1");
  Rng rng(seed);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(input_dimension));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = standard_normal(rng);
  }
  return m;
}

namespace {

Eigen::VectorXd tfidf_raw(const TfidfModel& model, const TokenSequence& chunk) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.vocabulary.size()));
  for (const auto& t : chunk.tokens) {
    if (auto i = model.index_of(t)) v[static_cast<Eigen::Index>(*i)] += 1.0;
  }
  v = v.cwiseProduct(model.idf);
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

Eigen::VectorXd project(const Eigen::MatrixXd& m, const Eigen::VectorXd& v) {
  Eigen::VectorXd p = m * v;
  const double norm = p.norm();
  if (norm > 0.0) p /= norm;
  return p;
}

} // namespace

Eigen::VectorXd tfidf_embed(const TfidfModel& model, const TokenSequence& chunk,
                            std::optional<Projection> projection) {
  auto v = tfidf_raw(model, chunk);
  if (!projection) return v;
  return project(gaussian_projection(projection->dimension, model.vocabulary.size(), projection->seed), v);
}

TfidfProvider::TfidfProvider(TfidfModel model, std::optional<Projection> projection)
    : model_(std::move(model)), projection_(projection) {
  if (model_.vocabulary.empty()) throw ArgumentError("tfidf provider needs a fitted model");
  model_.rebuild_index();
  if (projection_) {
    matrix_ = gaussian_projection(projection_->dimension, model_.vocabulary.size(), projection_->seed);
  }
}

std::size_t TfidfProvider::dimension() const {
  return projection_ ? projection_->dimension : model_.vocabulary.size();
}

Eigen::VectorXd TfidfProvider::embed_chunk(const TokenSequence& chunk) const {
  auto v = tfidf_raw(model_, chunk);
  if (!projection_) return v;
  return project(matrix_, v);
}

// ---------------------------------------------------------------------------

EmbeddingMatrix::EmbeddingMatrix(std::string provider_id, std::size_t context_budget,
                                 std::vector<std::string> ids, Eigen::MatrixXd vectors)
    : provider_id_(std::move(provider_id)),
      context_budget_(context_budget),
      ids_(std::move(ids)),
      vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(ids_.size()) != vectors_.rows()) {
    throw ArgumentError("embedding matrix: " + std::to_string(ids_.size()) + " ids for " +
                        std::to_string(vectors_.rows()) + " rows");
  }
  if (!vectors_.allFinite()) throw DataError("embedding matrix contains non-finite values");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw DataError("duplicate company_id '" + ids_[i] + "' in embedding matrix");
    }
  }
}

std::optional<std::size_t> EmbeddingMatrix::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Eigen::VectorXd EmbeddingMatrix::row(const std::string& id) const {
  auto i = index_of(id);
  if (!i) throw ArgumentError("unknown company_id '" + id + "'");
  return vectors_.row(static_cast<Eigen::Index>(*i)).transpose();
}

EmbeddingMatrix EmbeddingMatrix::subset(std::span<const std::string> ids) const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(ids.size()), vectors_.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    auto i = index_of(ids[r]);
    if (!i) throw ArgumentError("unknown company_id '" + ids[r] + "'");
    m.row(static_cast<Eigen::Index>(r)) = vectors_.row(static_cast<Eigen::Index>(*i));
  }
  return EmbeddingMatrix(provider_id_, context_budget_, std::vector<std::string>(ids.begin(), ids.end()),
                         std::move(m));
}

EmbeddingMatrix EmbeddingMatrix::sorted() const {
  auto ids = ids_;
  std::sort(ids.begin(), ids.end());
  return subset(ids);
}

bool EmbeddingMatrix::operator==(const EmbeddingMatrix& other) const {
  return provider_id_ == other.provider_id_ && context_budget_ == other.context_budget_ &&
         ids_ == other.ids_ && vectors_.rows() == other.vectors_.rows() &&
         vectors_.cols() == other.vectors_.cols() && vectors_ == other.vectors_;
}

} // namespace compsim
