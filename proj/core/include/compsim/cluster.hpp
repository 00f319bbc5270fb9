#pragma once

// Dimensionality reduction, clustering and entropy-based cluster quality.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "compsim/embed.hpp"

namespace compsim {

// ---------------------------------------------------------------------------
// Affinity graphs

enum class Affinity { KnnCosine, Rbf };
std::string_view to_string(Affinity a);
Affinity parse_affinity(std::string_view text);

struct AffinityOptions {
  Affinity kind = Affinity::KnnCosine;
  std::size_t knn = 15;
  double rbf_sigma = 0.0;  // <= 0: median pairwise distance
};

/// Symmetric non-negative affinity with zero diagonal.
/// knn-cosine: w_ij = max(cos_ij, 0) when j is among the knn most similar
/// rows of i or vice versa (symmetrized by max). rbf: exp(-|xi-xj|^2 / 2 sigma^2).
Eigen::MatrixXd build_affinity(const Eigen::MatrixXd& points, const AffinityOptions& options = {});

/// I - D^-1/2 W D^-1/2; isolated vertices get a unit diagonal.
Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity);

/// Number of connected components of the graph w_ij > 0.
std::size_t connected_components(const Eigen::MatrixXd& affinity, std::vector<int>* component_of = nullptr);

// ---------------------------------------------------------------------------
// Reduction

enum class ReductionMethod { Pca, SpectralEmbedding };
std::string_view to_string(ReductionMethod m);
ReductionMethod parse_reduction(std::string_view text);

struct ReducedEmbeddings {
  std::vector<std::string> ids;
  Eigen::MatrixXd vectors;  // n x r
  ReductionMethod method = ReductionMethod::Pca;
  std::string source_provider;
  Eigen::VectorXd explained_variance;  // PCA only: per component
  double total_variance = 0.0;         // PCA only
};

struct PcaResult {
  Eigen::MatrixXd scores;      // n x r
  Eigen::MatrixXd components;  // d x r, unit columns
  Eigen::VectorXd explained_variance;
  double total_variance = 0.0;
  Eigen::VectorXd mean;
};

/// Top-r principal components of the mean-centred rows, ordered by
/// descending variance, each signed so its largest-magnitude loading is
/// positive. Throws ComputeError when r exceeds the numerical rank.
PcaResult pca(const Eigen::MatrixXd& points, std::size_t r, double rank_tol = 1e-10);

/// Eigenvectors 1..r (the trivial first one dropped) of the normalized
/// Laplacian of the affinity graph, one row per point.
Eigen::MatrixXd spectral_embedding(const Eigen::MatrixXd& points, std::size_t r,
                                   const AffinityOptions& affinity = {});

ReducedEmbeddings reduce_dims(const EmbeddingMatrix& matrix, std::size_t target_dim, ReductionMethod method,
                              std::uint64_t seed, const AffinityOptions& affinity = {});

// ---------------------------------------------------------------------------
// Clustering on points (rows)

struct KMeansOptions {
  int max_iter = 300;
  double tol = 1e-10;  // total squared centre shift
  int n_init = 4;      // independent k-means++ starts, best inertia kept
};

struct KMeansResult {
  std::vector<int> labels;  // renumbered by first appearance
  Eigen::MatrixXd centers;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after every assignment step of the kept run
  int iterations = 0;
  int reseeded = 0;  // empty clusters moved to the farthest point
};

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t n_clusters, std::uint64_t seed,
                    const KMeansOptions& options = {});

enum class Linkage { Average, Complete, Ward };
std::string_view to_string(Linkage l);
Linkage parse_linkage(std::string_view text);

struct Merge {
  std::size_t a;  // representative (smallest original index) of each side
  std::size_t b;
  double height;
  std::size_t size;
};

struct AgglomerativeResult {
  std::vector<int> labels;
  std::vector<Merge> merges;  // in merge order, n - N entries
};

/// Greedy bottom-up merging on Euclidean distance (Lance-Williams updates).
/// Ties go to the lexicographically smallest pair of cluster representatives.
AgglomerativeResult agglomerative(const Eigen::MatrixXd& points, std::size_t n_clusters, Linkage linkage);

/// Groups the columns (features) of `points`; returns one group per column.
std::vector<int> feature_agglomeration(const Eigen::MatrixXd& points, std::size_t n_groups,
                                       Linkage linkage = Linkage::Ward);
/// Replaces every feature group by the mean of its columns.
Eigen::MatrixXd pool_feature_groups(const Eigen::MatrixXd& points, std::span<const int> groups);

struct SpectralResult {
  std::vector<int> labels;
  Eigen::VectorXd eigenvalues;  // ascending, all n
  std::size_t components = 1;   // connected components of the affinity graph
};

/// When the affinity graph has more connected components than `n_clusters`,
/// whole components are grouped by Ward linkage on their centroids instead.
SpectralResult spectral_cluster(const Eigen::MatrixXd& points, std::size_t n_clusters,
                                const AffinityOptions& affinity, std::uint64_t seed);
/// Same with a precomputed affinity matrix.
SpectralResult spectral_cluster_affinity(const Eigen::MatrixXd& affinity, std::size_t n_clusters,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------

struct ClusterAssignment {
  std::vector<std::string> ids;
  std::vector<int> cluster_of;  // parallel to ids, each in [0, n_clusters)
  std::size_t n_clusters = 0;

  ClusterAssignment() = default;
  ClusterAssignment(std::vector<std::string> ids, std::vector<int> clusters);
  /// Dense map id -> cluster.
  std::map<std::string, int> as_map() const;
};

/// One cluster per distinct label, numbered in sorted label order.
ClusterAssignment assignment_from_labels(const std::map<std::string, std::string>& labels);
/// Uniformly random labels in [0, n_clusters), every cluster non-empty when n >= n_clusters.
ClusterAssignment random_assignment(std::vector<std::string> ids, std::size_t n_clusters, std::uint64_t seed);

void save_assignment(const ClusterAssignment& a, const std::string& path);
ClusterAssignment load_assignment(const std::string& path);

struct ClusterQuality {
  double homogeneity = 0.0;
  double completeness = 0.0;
  double v_measure = 0.0;
};

/// Entropy-based scores (natural log) of `clusters` against reference `labels`.
ClusterQuality cluster_quality(std::span<const int> clusters, std::span<const std::string> labels);
ClusterQuality cluster_quality(const ClusterAssignment& assignment,
                               const std::map<std::string, std::string>& labels);

// ---------------------------------------------------------------------------
// Method sweep

enum class ClusterMethod { KMeans, AgglomerativeWard, AgglomerativeAverage, AgglomerativeComplete, Spectral };
std::string_view to_string(ClusterMethod m);
ClusterMethod parse_cluster_method(std::string_view text);

struct ClusterSettings {
  ClusterMethod method = ClusterMethod::Spectral;
  std::size_t n_clusters = 11;
  std::size_t reduced_dim = 10;  // 0 = no reduction
  ReductionMethod reduction = ReductionMethod::Pca;
  AffinityOptions affinity;
  std::uint64_t seed = 0;
};

ClusterAssignment cluster_embeddings(const EmbeddingMatrix& matrix, const ClusterSettings& settings);

struct SweepCell {
  ClusterMethod method;
  std::size_t n_clusters;
  std::size_t reduced_dim;
  ClusterQuality quality;
  std::uint64_t seed;
};

std::vector<SweepCell> cluster_sweep(const EmbeddingMatrix& matrix, const std::map<std::string, std::string>& labels,
                                     std::span<const ClusterMethod> methods, std::span<const std::size_t> n_clusters,
                                     std::span<const std::size_t> reduced_dims, const ClusterSettings& base);

/// CSV: method,n_clusters,reduced_dim,homogeneity,completeness,v_measure,seed
void write_sweep_report(std::ostream& out, std::span<const SweepCell> cells);

} // namespace compsim
