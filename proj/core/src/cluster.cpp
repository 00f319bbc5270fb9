#include "compsim/cluster.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "compsim/csv.hpp"
#include "compsim/error.hpp"
#include "compsim/random.hpp"

namespace compsim {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

// Flips the sign of each column so that its largest-magnitude entry is positive.
void fix_column_signs(Eigen::MatrixXd& m) {
  for (Index c = 0; c < m.cols(); ++c) {
    Index best = 0;
    for (Index r = 1; r < m.rows(); ++r) {
      if (std::abs(m(r, c)) > std::abs(m(best, c))) best = r;
    }
    if (m(best, c) < 0) m.col(c) = -m.col(c);
  }
}

std::vector<int> relabel_by_first_appearance(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Affinity graphs

std::string_view to_string(Affinity a) { return a == Affinity::KnnCosine ? "knn-cosine" : "rbf"; }

Affinity parse_affinity(std::string_view text) {
  if (text == "knn-cosine") return Affinity::KnnCosine;
  if (text == "rbf") return Affinity::Rbf;
  throw ArgumentError("unknown affinity '" + std::string(text) + "'");
}

Eigen::MatrixXd build_affinity(const Eigen::MatrixXd& points, const AffinityOptions& options) {
  const Index n = points.rows();
  if (n < 2) throw ArgumentError("affinity: need at least 2 points");
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  if (options.kind == Affinity::KnnCosine) {
    if (options.knn < 1) throw ArgumentError("affinity: knn must be >= 1");
    Eigen::MatrixXd unit = points;
    for (Index i = 0; i < n; ++i) {
      const double norm = unit.row(i).norm();
      if (norm > 0) unit.row(i) /= norm;
    }
    const Eigen::MatrixXd S = unit * unit.transpose();
    const auto k = std::min<std::size_t>(options.knn, static_cast<std::size_t>(n - 1));
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      std::iota(order.begin(), order.end(), Index{0});
      order.erase(order.begin() + i);
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                        [&](Index a, Index b) { return S(i, a) != S(i, b) ? S(i, a) > S(i, b) : a < b; });
      for (std::size_t t = 0; t < k; ++t) {
        const Index j = order[t];
        const double w = std::max(S(i, j), 0.0);
        W(i, j) = std::max(W(i, j), w);
        W(j, i) = std::max(W(j, i), w);
      }
      order.resize(static_cast<std::size_t>(n));
    }
  } else {
    Eigen::MatrixXd D2(n, n);
    std::vector<double> dists;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) D2(i, j) = (points.row(i) - points.row(j)).squaredNorm();
      for (Index j = i + 1; j < n; ++j) dists.push_back(std::sqrt(D2(i, j)));
    }
    double sigma = options.rbf_sigma;
    if (!(sigma > 0)) {
      std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2), dists.end());
      sigma = dists[dists.size() / 2];
      if (!(sigma > 0)) sigma = 1.0;
    }
    W = (-D2.array() / (2.0 * sigma * sigma)).exp().matrix();
    W.diagonal().setZero();
  }
  return W;
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity) {
  const Index n = affinity.rows();
  if (affinity.cols() != n) throw ArgumentError("laplacian: affinity must be square");
  Eigen::VectorXd dinv(n);
  for (Index i = 0; i < n; ++i) {
    const double deg = affinity.row(i).sum();
    dinv[i] = deg > 0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Eigen::MatrixXd L = -(dinv.asDiagonal() * affinity * dinv.asDiagonal());
  L.diagonal().array() += 1.0;
  return L;
}

std::size_t connected_components(const Eigen::MatrixXd& affinity, std::vector<int>* component_of) {
  const Index n = affinity.rows();
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int count = 0;
  for (Index s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    std::queue<Index> q;
    q.push(s);
    comp[static_cast<std::size_t>(s)] = count;
    while (!q.empty()) {
      const Index u = q.front();
      q.pop();
      for (Index v = 0; v < n; ++v) {
        if (affinity(u, v) > 0 && comp[static_cast<std::size_t>(v)] < 0) {
          comp[static_cast<std::size_t>(v)] = count;
          q.push(v);
        }
      }
    }
    ++count;
  }
  if (component_of) *component_of = std::move(comp);
  return static_cast<std::size_t>(count);
}

// ---------------------------------------------------------------------------
// Reduction

std::string_view to_string(ReductionMethod m) { return m == ReductionMethod::Pca ? "pca" : "spectral-embedding"; }

ReductionMethod parse_reduction(std::string_view text) {
  if (text == "pca") return ReductionMethod::Pca;
  if (text == "spectral-embedding") return ReductionMethod::SpectralEmbedding;
  throw ArgumentError("unknown reduction method '" + std::string(text) + "'");
}

PcaResult pca(const Eigen::MatrixXd& points, std::size_t r, double rank_tol) {
  const Index n = points.rows();
  const Index d = points.cols();
  if (r < 1 || idx(r) > std::min(n - 1, d)) {
    throw ArgumentError("pca: target dimension " + std::to_string(r) + " invalid for " + std::to_string(n) +
                        " x " + std::to_string(d) + " input");
  }
  PcaResult out;
  out.mean = points.colwise().mean().transpose();
  const Eigen::MatrixXd centered = points.rowwise() - out.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() < idx(r) || !(s[0] > 0) || s[idx(r) - 1] <= rank_tol * s[0]) {
    throw ComputeError("pca: requested " + std::to_string(r) + " components exceed the numerical rank of the input");
  }
  out.components = svd.matrixV().leftCols(idx(r));
  fix_column_signs(out.components);
  out.scores = centered * out.components;
  const double denom = static_cast<double>(std::max<Index>(n - 1, 1));
  out.explained_variance = s.head(idx(r)).array().square() / denom;
  out.total_variance = centered.squaredNorm() / denom;
  return out;
}

Eigen::MatrixXd spectral_embedding(const Eigen::MatrixXd& points, std::size_t r, const AffinityOptions& affinity) {
  if (r < 1 || idx(r) + 1 > points.rows()) throw ArgumentError("spectral_embedding: invalid target dimension");
  const auto L = normalized_laplacian(build_affinity(points, affinity));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L);
  if (eig.info() != Eigen::Success) throw ComputeError("spectral_embedding: eigensolver did not converge");
  Eigen::MatrixXd out = eig.eigenvectors().middleCols(1, idx(r));
  fix_column_signs(out);
  return out;
}

ReducedEmbeddings reduce_dims(const EmbeddingMatrix& matrix, std::size_t target_dim, ReductionMethod method,
                              std::uint64_t /*seed*/, const AffinityOptions& affinity) {
  if (target_dim < 2 || target_dim >= matrix.dimension()) {
    throw ArgumentError("reduce_dims: need 2 <= r < dimension (r=" + std::to_string(target_dim) +
                        ", dimension=" + std::to_string(matrix.dimension()) + ")");
  }
  if (matrix.size() <= target_dim) throw ArgumentError("reduce_dims: need more rows than target dimensions");
  ReducedEmbeddings out;
  out.ids = matrix.ids();
  out.method = method;
  out.source_provider = matrix.provider_id();
  if (method == ReductionMethod::Pca) {
    auto p = pca(matrix.vectors(), target_dim);
    out.vectors = std::move(p.scores);
    out.explained_variance = std::move(p.explained_variance);
    out.total_variance = p.total_variance;
  } else {
    out.vectors = spectral_embedding(matrix.vectors(), target_dim, affinity);
  }
  return out;
}

// ---------------------------------------------------------------------------
// k-means

namespace {

struct KMeansRun {
  std::vector<int> labels;
  Eigen::MatrixXd centers;
  std::vector<double> history;
  int iterations = 0;
  int reseeded = 0;
};

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& X, std::size_t k, Rng& rng) {
  const Index n = X.rows();
  Eigen::MatrixXd centers(idx(k), X.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  auto first = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
  centers.row(0) = X.row(first);
  chosen[static_cast<std::size_t>(first)] = true;
  Eigen::VectorXd d2 = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = -1;
    if (total > 0) {
      const double target = uniform_unit(rng) * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // rounding at the tail
        for (Index i = n - 1; i >= 0; --i) {
          if (d2[i] > 0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      for (Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    centers.row(idx(c)) = X.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    d2 = d2.cwiseMin((X.rowwise() - centers.row(idx(c))).rowwise().squaredNorm());
  }
  return centers;
}

double assign(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centers, std::vector<int>& labels,
              Eigen::VectorXd& dist) {
  double inertia = 0.0;
  for (Index i = 0; i < X.rows(); ++i) {
    int best = 0;
    double best_d = (X.row(i) - centers.row(0)).squaredNorm();
    for (Index c = 1; c < centers.rows(); ++c) {
      const double d = (X.row(i) - centers.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist[i] = best_d;
    inertia += best_d;
  }
  return inertia;
}

KMeansRun lloyd(const Eigen::MatrixXd& X, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  Rng rng(seed);
  KMeansRun run;
  run.centers = kmeanspp_seed(X, k, rng);
  run.labels.assign(static_cast<std::size_t>(X.rows()), -1);
  Eigen::VectorXd dist(X.rows());
  std::vector<int> previous;
  for (;;) {
    previous = run.labels;
    run.history.push_back(assign(X, run.centers, run.labels, dist));
    if (run.labels == previous || run.iterations >= options.max_iter) break;
    ++run.iterations;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(idx(k), X.cols());
    std::vector<std::size_t> counts(k, 0);
    for (Index i = 0; i < X.rows(); ++i) {
      const auto c = static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)]);
      sums.row(idx(c)) += X.row(i);
      ++counts[c];
    }
    Eigen::MatrixXd next = run.centers;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) next.row(idx(c)) = sums.row(idx(c)) / static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      Index far = 0;
      for (Index i = 1; i < X.rows(); ++i) {
        if (dist[i] > dist[far]) far = i;
      }
      next.row(idx(c)) = X.row(far);
      dist[far] = 0.0;
      ++run.reseeded;
    }
    const double shift = (next - run.centers).squaredNorm();
    run.centers = std::move(next);
    if (shift <= options.tol) {
      run.history.push_back(assign(X, run.centers, run.labels, dist));
      break;
    }
  }
  return run;
}

} // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t n_clusters, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (n_clusters < 1) throw ArgumentError("kmeans: need at least one cluster");
  if (idx(n_clusters) > points.rows()) {
    throw ArgumentError("kmeans: " + std::to_string(n_clusters) + " clusters for " +
                        std::to_string(points.rows()) + " points");
  }
  if (!points.allFinite()) throw ArgumentError("kmeans: non-finite input");
  std::optional<KMeansRun> best;
  for (int run = 0; run < std::max(1, options.n_init); ++run) {
    auto r = lloyd(points, n_clusters, derive_seed(seed, static_cast<std::uint64_t>(run)), options);
    if (!best || r.history.back() < best->history.back()) best = std::move(r);
  }
  KMeansResult out;
  // centres follow the renumbering
  out.labels = relabel_by_first_appearance(best->labels);
  out.centers = Eigen::MatrixXd::Zero(best->centers.rows(), best->centers.cols());
  std::vector<bool> placed(n_clusters, false);
  int next_free = 0;
  for (std::size_t i = 0; i < best->labels.size(); ++i) {
    const auto to = static_cast<std::size_t>(out.labels[i]);
    if (!placed[to]) {
      out.centers.row(idx(to)) = best->centers.row(best->labels[i]);
      placed[to] = true;
      next_free = std::max(next_free, out.labels[i] + 1);
    }
  }
  out.inertia = best->history.back();
  out.inertia_history = std::move(best->history);
  out.iterations = best->iterations;
  out.reseeded = best->reseeded;
  return out;
}

// ---------------------------------------------------------------------------
// Agglomerative

std::string_view to_string(Linkage l) {
  switch (l) {
    case Linkage::Average: return "average";
    case Linkage::Complete: return "complete";
    case Linkage::Ward: return "ward";
  }
  return "?";
}

Linkage parse_linkage(std::string_view text) {
  if (text == "average") return Linkage::Average;
  if (text == "complete") return Linkage::Complete;
  if (text == "ward") return Linkage::Ward;
  throw ArgumentError("unknown linkage '" + std::string(text) + "'");
}

AgglomerativeResult agglomerative(const Eigen::MatrixXd& points, std::size_t n_clusters, Linkage linkage) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n_clusters < 1 || n_clusters > n) {
    throw ArgumentError("agglomerative: " + std::to_string(n_clusters) + " clusters for " + std::to_string(n) +
                        " points");
  }
  const bool ward = linkage == Linkage::Ward;
  Eigen::MatrixXd D(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    D(idx(i), idx(i)) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sq = (points.row(idx(i)) - points.row(idx(j))).squaredNorm();
      D(idx(i), idx(j)) = D(idx(j), idx(i)) = ward ? sq : std::sqrt(sq);
    }
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1), nn(n, kNone), parent(n);
  std::vector<double> nnd(n, kInf);
  std::iota(parent.begin(), parent.end(), 0);

  auto refresh = [&](std::size_t i) {
    nn[i] = kNone;
    nnd[i] = kInf;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (active[j] && D(idx(i), idx(j)) < nnd[i]) {
        nnd[i] = D(idx(i), idx(j));
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  AgglomerativeResult out;
  for (std::size_t remaining = n; remaining > n_clusters; --remaining) {
    std::size_t a = kNone;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && nn[i] != kNone && (a == kNone || nnd[i] < nnd[a])) a = i;
    }
    const std::size_t b = nn[a];
    const double dab = D(idx(a), idx(b));
    const double na = static_cast<double>(size[a]);
    const double nb = static_cast<double>(size[b]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double dka = D(idx(k), idx(a));
      const double dkb = D(idx(k), idx(b));
      double v = 0.0;
      switch (linkage) {
        case Linkage::Average: v = (na * dka + nb * dkb) / (na + nb); break;
        case Linkage::Complete: v = std::max(dka, dkb); break;
        case Linkage::Ward: {
          const double nk = static_cast<double>(size[k]);
          v = ((nk + na) * dka + (nk + nb) * dkb - nk * dab) / (nk + na + nb);
          break;
        }
      }
      D(idx(k), idx(a)) = D(idx(a), idx(k)) = v;
    }
    active[b] = false;
    parent[b] = a;
    size[a] += size[b];
    out.merges.push_back({a, b, ward ? std::sqrt(std::max(dab, 0.0)) : dab, size[a]});

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k]) continue;
      if (k == a || nn[k] == a || nn[k] == b) {
        refresh(k);
      } else if (k < a) {
        const double v = D(idx(k), idx(a));
        if (v < nnd[k] || (v == nnd[k] && a < nn[k])) {
          nnd[k] = v;
          nn[k] = a;
        }
      }
    }
  }

  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i];
    return i;
  };
  std::vector<int> raw(n);
  for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<int>(root(i));
  out.labels = relabel_by_first_appearance(raw);
  return out;
}

std::vector<int> feature_agglomeration(const Eigen::MatrixXd& points, std::size_t n_groups, Linkage linkage) {
  return agglomerative(points.transpose(), n_groups, linkage).labels;
}

Eigen::MatrixXd pool_feature_groups(const Eigen::MatrixXd& points, std::span<const int> groups) {
  if (idx(groups.size()) != points.cols()) throw ArgumentError("pool_feature_groups: one group per column required");
  const int n_groups = groups.empty() ? 0 : *std::max_element(groups.begin(), groups.end()) + 1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.rows(), n_groups);
  std::vector<double> counts(static_cast<std::size_t>(n_groups), 0.0);
  for (std::size_t c = 0; c < groups.size(); ++c) {
    out.col(groups[c]) += points.col(idx(c));
    counts[static_cast<std::size_t>(groups[c])] += 1.0;
  }
  for (int g = 0; g < n_groups; ++g) {
    if (counts[static_cast<std::size_t>(g)] > 0) out.col(g) /= counts[static_cast<std::size_t>(g)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectral

SpectralResult spectral_cluster_affinity(const Eigen::MatrixXd& affinity, std::size_t n_clusters, std::uint64_t seed) {
  const Index n = affinity.rows();
  if (n_clusters < 1 || idx(n_clusters) > n) {
    throw ArgumentError("spectral_cluster: " + std::to_string(n_clusters) + " clusters for " + std::to_string(n) +
                        " points");
  }
  SpectralResult out;
  out.components = connected_components(affinity);
  const auto L = normalized_laplacian(affinity);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L);
  if (eig.info() != Eigen::Success) {
    throw ComputeError("spectral_cluster: eigensolver did not converge (LAPACK-style iteration cap reached)");
  }
  out.eigenvalues = eig.eigenvalues();
  Eigen::MatrixXd U = eig.eigenvectors().leftCols(idx(n_clusters));
  for (Index i = 0; i < n; ++i) {
    const double norm = U.row(i).norm();
    if (norm > 0) U.row(i) /= norm;
  }
  out.labels = kmeans(U, n_clusters, seed).labels;
  return out;
}

SpectralResult spectral_cluster(const Eigen::MatrixXd& points, std::size_t n_clusters, const AffinityOptions& affinity,
                                std::uint64_t seed) {
  if (n_clusters < 1 || idx(n_clusters) > points.rows()) {
    throw ArgumentError("spectral_cluster: " + std::to_string(n_clusters) + " clusters for " +
                        std::to_string(points.rows()) + " points");
  }
  const auto W = build_affinity(points, affinity);
  std::vector<int> component_of;
  const auto components = connected_components(W, &component_of);
  if (components <= n_clusters) return spectral_cluster_affinity(W, n_clusters, seed);

  // More components than clusters: the components are the clusters' building
  // blocks, grouped by Ward linkage on their centroids.
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(idx(components), points.cols());
  std::vector<double> counts(components, 0.0);
  for (Index i = 0; i < points.rows(); ++i) {
    const auto c = static_cast<std::size_t>(component_of[static_cast<std::size_t>(i)]);
    centroids.row(idx(c)) += points.row(i);
    counts[c] += 1.0;
  }
  for (std::size_t c = 0; c < components; ++c) centroids.row(idx(c)) /= counts[c];
  const auto groups = agglomerative(centroids, n_clusters, Linkage::Ward).labels;
  SpectralResult out;
  out.components = components;
  out.eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(normalized_laplacian(W), Eigen::EigenvaluesOnly)
                        .eigenvalues();
  std::vector<int> raw(component_of.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = groups[static_cast<std::size_t>(component_of[i])];
  out.labels = relabel_by_first_appearance(raw);
  return out;
}

// ---------------------------------------------------------------------------

ClusterAssignment::ClusterAssignment(std::vector<std::string> ids_in, std::vector<int> clusters)
    : ids(std::move(ids_in)), cluster_of(std::move(clusters)) {
  if (ids.size() != cluster_of.size()) throw ArgumentError("assignment: ids and clusters differ in length");
  if (ids.empty()) throw ArgumentError("assignment: no ids");
  int max_c = -1;
  for (int c : cluster_of) {
    if (c < 0) throw DataError("assignment: negative cluster index");
    max_c = std::max(max_c, c);
  }
  n_clusters = static_cast<std::size_t>(max_c + 1);
  auto sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DataError("assignment: duplicate company_id");
  }
}

std::map<std::string, int> ClusterAssignment::as_map() const {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.emplace(ids[i], cluster_of[i]);
  return out;
}

ClusterAssignment assignment_from_labels(const std::map<std::string, std::string>& labels) {
  std::map<std::string, int> code;
  for (const auto& [id, label] : labels) code.emplace(label, 0);
  int next = 0;
  for (auto& [label, c] : code) c = next++;
  std::vector<std::string> ids;
  std::vector<int> clusters;
  for (const auto& [id, label] : labels) {
    ids.push_back(id);
    clusters.push_back(code[label]);
  }
  return ClusterAssignment(std::move(ids), std::move(clusters));
}

ClusterAssignment random_assignment(std::vector<std::string> ids, std::size_t n_clusters, std::uint64_t seed) {
  if (n_clusters < 1) throw ArgumentError("random_assignment: need at least one cluster");
  Rng rng(seed);
  std::vector<int> clusters(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    clusters[i] = i < n_clusters ? static_cast<int>(i) : static_cast<int>(uniform_index(rng, n_clusters));
  }
  shuffle(std::span<int>(clusters), rng);
  return ClusterAssignment(std::move(ids), std::move(clusters));
}

void save_assignment(const ClusterAssignment& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  csv::write_row(out, {"company_id", "cluster"});
  for (std::size_t i = 0; i < a.ids.size(); ++i) csv::write_row(out, {a.ids[i], std::to_string(a.cluster_of[i])});
}

ClusterAssignment load_assignment(const std::string& path) {
  const auto table = csv::read_file(path, {"company_id", "cluster"});
  std::vector<std::string> ids;
  std::vector<int> clusters;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    ids.push_back(table.rows[i][0]);
    try {
      std::size_t used = 0;
      clusters.push_back(std::stoi(table.rows[i][1], &used));
      if (used != table.rows[i][1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(table.line_numbers[i]) + ": invalid cluster index");
    }
  }
  return ClusterAssignment(std::move(ids), std::move(clusters));
}

// ---------------------------------------------------------------------------
// Quality

ClusterQuality cluster_quality(std::span<const int> clusters, std::span<const std::string> labels) {
  if (clusters.size() != labels.size()) throw ArgumentError("cluster_quality: length mismatch");
  if (clusters.empty()) throw ArgumentError("cluster_quality: empty input");
  std::map<std::string, std::size_t> class_index;
  std::map<int, std::size_t> cluster_index;
  for (const auto& l : labels) class_index.emplace(l, class_index.size());
  for (int c : clusters) cluster_index.emplace(c, cluster_index.size());
  const auto C = class_index.size();
  const auto K = cluster_index.size();
  std::vector<double> table(C * K, 0.0), class_n(C, 0.0), cluster_n(K, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = class_index[labels[i]];
    const auto k = cluster_index[clusters[i]];
    table[c * K + k] += 1.0;
    class_n[c] += 1.0;
    cluster_n[k] += 1.0;
  }
  const double N = static_cast<double>(labels.size());
  auto entropy = [&](const std::vector<double>& counts) {
    double h = 0.0;
    for (double n : counts) {
      if (n > 0) h -= (n / N) * std::log(n / N);
    }
    return h;
  };
  const double h_class = entropy(class_n);
  const double h_cluster = entropy(cluster_n);
  double h_class_given_cluster = 0.0;
  double h_cluster_given_class = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t c = 0; c < C; ++c) {
      const double n = table[c * K + k];
      if (n > 0) h_class_given_cluster -= (n / N) * std::log(n / cluster_n[k]);
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K; ++k) {
      const double n = table[c * K + k];
      if (n > 0) h_cluster_given_class -= (n / N) * std::log(n / class_n[c]);
    }
  }
  ClusterQuality q;
  q.homogeneity = h_class == 0.0 ? 1.0 : std::clamp(1.0 - h_class_given_cluster / h_class, 0.0, 1.0);
  q.completeness = h_cluster == 0.0 ? 1.0 : std::clamp(1.0 - h_cluster_given_class / h_cluster, 0.0, 1.0);
  q.v_measure = (q.homogeneity + q.completeness) == 0.0
                    ? 0.0
                    : 2.0 * q.homogeneity * q.completeness / (q.homogeneity + q.completeness);
  return q;
}

ClusterQuality cluster_quality(const ClusterAssignment& assignment, const std::map<std::string, std::string>& labels) {
  if (assignment.ids.size() != labels.size()) throw ArgumentError("cluster_quality: id sets differ");
  std::vector<std::string> ordered;
  ordered.reserve(assignment.ids.size());
  for (const auto& id : assignment.ids) {
    auto it = labels.find(id);
    if (it == labels.end()) throw ArgumentError("cluster_quality: no label for '" + id + "'");
    ordered.push_back(it->second);
  }
  return cluster_quality(assignment.cluster_of, ordered);
}

// ---------------------------------------------------------------------------
// Sweep

std::string_view to_string(ClusterMethod m) {
  switch (m) {
    case ClusterMethod::KMeans: return "kmeans";
    case ClusterMethod::AgglomerativeWard: return "agglomerative-ward";
    case ClusterMethod::AgglomerativeAverage: return "agglomerative-average";
    case ClusterMethod::AgglomerativeComplete: return "agglomerative-complete";
    case ClusterMethod::Spectral: return "spectral";
  }
  return "?";
}

ClusterMethod parse_cluster_method(std::string_view text) {
  for (auto m : {ClusterMethod::KMeans, ClusterMethod::AgglomerativeWard, ClusterMethod::AgglomerativeAverage,
                 ClusterMethod::AgglomerativeComplete, ClusterMethod::Spectral}) {
    if (to_string(m) == text) return m;
  }
  throw ArgumentError("unknown clustering method '" + std::string(text) + "'");
}

namespace {

std::vector<int> run_method(const Eigen::MatrixXd& points, const ClusterSettings& s) {
  switch (s.method) {
    case ClusterMethod::KMeans: return kmeans(points, s.n_clusters, s.seed).labels;
    case ClusterMethod::AgglomerativeWard: return agglomerative(points, s.n_clusters, Linkage::Ward).labels;
    case ClusterMethod::AgglomerativeAverage: return agglomerative(points, s.n_clusters, Linkage::Average).labels;
    case ClusterMethod::AgglomerativeComplete: return agglomerative(points, s.n_clusters, Linkage::Complete).labels;
    case ClusterMethod::Spectral: return spectral_cluster(points, s.n_clusters, s.affinity, s.seed).labels;
  }
  return {};
}

Eigen::MatrixXd reduced_points(const EmbeddingMatrix& matrix, const ClusterSettings& s) {
  if (s.reduced_dim == 0 || s.reduced_dim >= matrix.dimension()) return matrix.vectors();
  return reduce_dims(matrix, s.reduced_dim, s.reduction, s.seed, s.affinity).vectors;
}

} // namespace

ClusterAssignment cluster_embeddings(const EmbeddingMatrix& matrix, const ClusterSettings& settings) {
  return ClusterAssignment(matrix.ids(), run_method(reduced_points(matrix, settings), settings));
}

std::vector<SweepCell> cluster_sweep(const EmbeddingMatrix& matrix, const std::map<std::string, std::string>& labels,
                                     std::span<const ClusterMethod> methods, std::span<const std::size_t> n_clusters,
                                     std::span<const std::size_t> reduced_dims, const ClusterSettings& base) {
  std::vector<std::string> truth;
  for (const auto& id : matrix.ids()) {
    auto it = labels.find(id);
    if (it == labels.end()) throw ArgumentError("cluster_sweep: no label for '" + id + "'");
    truth.push_back(it->second);
  }
  std::vector<Eigen::MatrixXd> reduced;
  std::vector<SweepCell> cells;
  std::vector<std::size_t> source;
  for (auto r : reduced_dims) {
    ClusterSettings s = base;
    s.reduced_dim = r;
    if (r != 0 && (r >= matrix.dimension() || r >= matrix.size())) continue;
    reduced.push_back(reduced_points(matrix, s));
    for (auto method : methods) {
      for (auto n : n_clusters) {
        if (n < 1 || n > matrix.size()) continue;
        cells.push_back({method, n, r, {}, base.seed});
        source.push_back(reduced.size() - 1);
      }
    }
  }
  std::vector<std::exception_ptr> failures(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        ClusterSettings s = base;
        s.method = cells[i].method;
        s.n_clusters = cells[i].n_clusters;
        cells[i].quality = cluster_quality(run_method(reduced[source[i]], s), truth);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(std::clamp(std::thread::hardware_concurrency(), 1U, 8U), cells.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return cells;
}

void write_sweep_report(std::ostream& out, std::span<const SweepCell> cells) {
  csv::write_row(out, {"method", "n_clusters", "reduced_dim", "homogeneity", "completeness", "v_measure", "seed"});
  for (const auto& c : cells) {
    csv::write_row(out, {std::string(to_string(c.method)), std::to_string(c.n_clusters), std::to_string(c.reduced_dim),
                         csv::format_double(c.quality.homogeneity), csv::format_double(c.quality.completeness),
                         csv::format_double(c.quality.v_measure), std::to_string(c.seed)});
  }
}

} // namespace compsim
