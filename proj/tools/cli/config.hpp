#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace compsim::cli {

struct ProviderConfig {
  std::string id = "tfidf-rp";  // hash-bow | tfidf-rp | remote
  std::size_t dimension = 256;  // tfidf-rp: 0 keeps the raw vocabulary space
  std::uint64_t seed = 0;
  std::size_t max_features = 5000;
  std::string endpoint;
  std::string remote_id;
  std::string auth_env;
  int timeout_ms = 30000;
  int retries = 2;
  std::size_t batch_size = 32;
};

struct SplitConfig {
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
};

struct ClassifierConfig {
  std::string level = "sector";
  double lambda = 1.0;
  double tol = 1e-6;
  int max_iter = 5000;
};

struct SimilarityConfig {
  std::vector<std::size_t> ks{1, 5, 10, 50};
  std::vector<int> years;  // empty: fiscal_year + 1
  std::size_t min_overlap = 60;
  std::vector<std::string> baselines{"sector", "industry"};
};

struct ClusterConfig {
  std::vector<std::string> methods{"kmeans", "agglomerative-ward", "agglomerative-average", "agglomerative-complete",
                                   "spectral"};
  std::vector<std::size_t> n_clusters{11, 25, 66, 100};
  std::vector<std::size_t> reduced_dims{5, 10, 20};
  std::string reduction = "pca";
  std::string affinity = "knn-cosine";
  std::size_t knn = 15;
  std::string label_level = "sector";
  std::uint64_t seed = 0;
  std::string method = "spectral";  // configuration kept for attribution
  std::size_t n = 11;
  std::size_t reduced_dim = 10;
};

struct AttributionConfig {
  std::string first;  // YYYY-MM-DD; empty: first day of the return data
  std::string last;
  std::size_t min_days = 15;
  double winsorize = 0.0;
  std::uint64_t random_seed = 0;
};

struct RunConfig {
  std::string corpus = "corpus.jsonl";
  std::string hierarchy = "hierarchy.csv";
  std::string returns = "returns.csv";
  std::string output_dir = "out";
  std::size_t min_description_chars = 1;
  std::size_t min_item1_chars = 200;
  int fiscal_year = 0;
  ProviderConfig provider;
  std::size_t context_budget = 512;
  std::size_t window = 512;
  double tokens_per_word = 1.0;
  std::string pooling = "equal";
  std::string cache_precision = "float32";
  std::uint64_t pairs_seed = 0;
  SplitConfig split;
  ClassifierConfig classifier;
  SimilarityConfig similarity;
  ClusterConfig cluster;
  AttributionConfig attribution;
};

nlohmann::json to_json(const RunConfig& config);
/// Throws ArgumentError on unknown keys or wrongly typed values.
RunConfig from_json(const nlohmann::json& j);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& config, const std::string& path);

/// Applies "a.b.c=value"; the value is parsed as JSON and falls back to a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// 16 hex digits of FNV-1a over the canonical JSON dump.
std::string config_hash(const RunConfig& config);

} // namespace compsim::cli
