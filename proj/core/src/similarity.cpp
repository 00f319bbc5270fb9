#include "compsim/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "compsim/csv.hpp"
#include "compsim/error.hpp"

namespace compsim {

namespace {

double clamp_unit(double c) { return std::clamp(c, -1.0, 1.0); }

struct RankedCandidate {
  std::size_t index;
  double similarity;
};

// Sorted by similarity descending, ties by id ascending; keeps the first `k`.
void rank_candidates(std::vector<RankedCandidate>& cands, const std::vector<std::string>& ids, std::size_t k) {
  auto better = [&](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return ids[a.index] < ids[b.index];
  };
  k = std::min(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k), cands.end(), better);
  cands.resize(k);
}

struct RowCache {
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> norms;

  explicit RowCache(const EmbeddingMatrix& m) {
    for (Eigen::Index r = 0; r < m.vectors().rows(); ++r) {
      rows.emplace_back(m.vectors().row(r).transpose());
      norms.push_back(rows.back().norm());
    }
  }
  double cosine(std::size_t i, std::size_t j) const {
    return clamp_unit(rows[i].dot(rows[j]) / (norms[i] * norms[j]));
  }
};

} // namespace

double cosine_similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw ArgumentError("cosine_similarity: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw ArgumentError("cosine_similarity: zero vector");
  return clamp_unit(u.dot(v) / (nu * nv));
}

PeerList top_k_peers(const EmbeddingMatrix& matrix, const std::string& query_id, std::size_t k) {
  const auto q = matrix.index_of(query_id);
  if (!q) throw ArgumentError("top_k_peers: unknown company_id '" + query_id + "'");
  if (k < 1 || k + 1 > matrix.size()) {
    throw ArgumentError("top_k_peers: k=" + std::to_string(k) + " out of range for " +
                        std::to_string(matrix.size()) + " companies");
  }
  const RowCache cache(matrix);
  if (cache.norms[*q] == 0.0) throw ArgumentError("top_k_peers: query '" + query_id + "' has a zero embedding");
  std::vector<RankedCandidate> cands;
  for (std::size_t j = 0; j < matrix.size(); ++j) {
    if (j == *q || cache.norms[j] == 0.0) continue;
    cands.push_back({j, cache.cosine(*q, j)});
  }
  rank_candidates(cands, matrix.ids(), k);
  PeerList out{query_id, {}};
  for (const auto& c : cands) out.neighbors.push_back({matrix.ids()[c.index], c.similarity});
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double pearson_aligned(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (sxx == 0.0 || syy == 0.0 || constant(x) || constant(y)) {
    throw CorrelationError(CorrelationError::Kind::ZeroVariance, "zero return variance on the overlap");
  }
  return clamp_unit(sxy / std::sqrt(sxx * syy));
}

double correlate(std::span<const ReturnObservation> a, std::span<const ReturnObservation> b,
                 std::size_t min_overlap, const std::string& ida, const std::string& idb) {
  std::vector<double> x, y;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].date < b[j].date) {
      ++i;
    } else if (b[j].date < a[i].date) {
      ++j;
    } else {
      x.push_back(a[i].value);
      y.push_back(b[j].value);
      ++i;
      ++j;
    }
  }
  if (x.size() < std::max<std::size_t>(min_overlap, 2)) {
    throw CorrelationError(CorrelationError::Kind::InsufficientOverlap,
                           "only " + std::to_string(x.size()) + " common dates between '" + ida + "' and '" +
                               idb + "'");
  }
  return pearson_aligned(x, y);
}

std::span<const ReturnObservation> window_view(const ReturnSeries& s, const DateRange& w) {
  const auto& obs = s.observations();
  auto lo = std::lower_bound(obs.begin(), obs.end(), w.first,
                             [](const ReturnObservation& o, Date d) { return o.date < d; });
  auto hi = std::upper_bound(obs.begin(), obs.end(), w.last,
                             [](Date d, const ReturnObservation& o) { return d < o.date; });
  return {obs.data() + (lo - obs.begin()), static_cast<std::size_t>(hi - lo)};
}

// Per-year eligible universe with lazily cached pairwise correlations.
class YearUniverse {
public:
  YearUniverse(std::vector<std::string> ids, std::vector<std::span<const ReturnObservation>> series,
               std::size_t min_overlap)
      : ids_(std::move(ids)), series_(std::move(series)), min_overlap_(min_overlap) {}

  std::optional<double> rho(std::size_t i, std::size_t j) {
    const auto key = i < j ? std::pair{i, j} : std::pair{j, i};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::optional<double> value;
    try {
      value = correlate(series_[key.first], series_[key.second], min_overlap_, ids_[key.first],
                        ids_[key.second]);
    } catch (const CorrelationError&) {
      value = std::nullopt;
    }
    cache_.emplace(key, value);
    return value;
  }

private:
  struct PairHash {
    std::size_t operator()(const std::pair<std::size_t, std::size_t>& p) const {
      return std::hash<std::size_t>{}(p.first * 1000003u ^ p.second);
    }
  };
  std::vector<std::string> ids_;
  std::vector<std::span<const ReturnObservation>> series_;
  std::size_t min_overlap_;
  std::unordered_map<std::pair<std::size_t, std::size_t>, std::optional<double>, PairHash> cache_;
};

// Mean of the available correlations between `i` and `peers`, or nullopt.
std::optional<double> mean_rho(YearUniverse& u, std::size_t i, std::span<const std::size_t> peers) {
  double sum = 0.0;
  std::size_t n = 0;
  for (auto j : peers) {
    if (auto r = u.rho(i, j)) {
      sum += *r;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

void finish_year(YearCorrelation& y) {
  if (y.per_company.empty()) {
    y.scored = false;
    if (y.skip_reason.empty()) y.skip_reason = "no company had a usable peer correlation";
    return;
  }
  double sum = 0.0;
  for (const auto& [id, v] : y.per_company) sum += v;
  y.rho_bar = sum / static_cast<double>(y.per_company.size());
  y.scored = true;
}

void finish_report(CorrelationReport& r) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& y : r.years) {
    r.excluded += y.excluded;
    if (!y.scored) continue;
    sum += y.rho_bar;
    ++n;
    r.coverage += y.per_company.size();
  }
  if (n == 0) {
    throw ComputeError(r.method + ": no year could be scored" +
                       (r.years.empty() ? std::string{} : " (" + r.years.front().skip_reason + ")"));
  }
  r.rho_bar = sum / static_cast<double>(n);
}

} // namespace

double pairwise_return_correlation(const ReturnSeries& a, const ReturnSeries& b, const DateRange& window,
                                   std::size_t min_overlap) {
  return correlate(window_view(a, window), window_view(b, window), min_overlap, a.company_id(), b.company_id());
}

std::string CorrelationReport::k_label() const { return k ? std::to_string(*k) : std::string("dynamic"); }

std::vector<CorrelationReport> avg_peer_correlation(const EmbeddingMatrix& matrix, const ReturnsMap& returns,
                                                    std::span<const std::size_t> ks, std::span<const int> years,
                                                    const CorrelationOptions& options) {
  if (years.empty()) throw ArgumentError("avg_peer_correlation: no years given");
  if (ks.empty()) throw ArgumentError("avg_peer_correlation: no k given");
  for (auto k : ks) {
    if (k < 1) throw ArgumentError("avg_peer_correlation: k must be >= 1");
  }
  std::size_t with_returns = 0;
  for (const auto& id : matrix.ids()) with_returns += returns.contains(id) ? 1 : 0;
  if (with_returns == 0) throw ComputeError("avg_peer_correlation: no company has both an embedding and returns");

  const RowCache cache(matrix);
  const auto max_k = *std::max_element(ks.begin(), ks.end());
  std::vector<CorrelationReport> reports(ks.size());
  for (std::size_t r = 0; r < ks.size(); ++r) {
    reports[r].method = matrix.provider_id().empty() ? "embedding" : matrix.provider_id();
    reports[r].k = ks[r];
  }

  for (int year : years) {
    const auto window = calendar_year(year);
    std::vector<std::size_t> rows;  // matrix rows in this year's universe
    std::vector<std::string> ids;
    std::vector<std::span<const ReturnObservation>> series;
    std::size_t missing = 0;
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      const auto it = returns.find(matrix.ids()[i]);
      if (it == returns.end() || cache.norms[i] == 0.0) {
        ++missing;
        continue;
      }
      auto view = window_view(it->second, window);
      if (view.size() < std::max<std::size_t>(options.min_overlap, 2)) {
        ++missing;
        continue;
      }
      rows.push_back(i);
      ids.push_back(matrix.ids()[i]);
      series.push_back(view);
    }
    YearUniverse universe(ids, series, options.min_overlap);

    // peers[u] = universe indices of the max_k nearest companies
    std::vector<std::vector<std::size_t>> peers(rows.size());
    if (rows.size() > 1) {
      for (std::size_t u = 0; u < rows.size(); ++u) {
        std::vector<RankedCandidate> cands;
        cands.reserve(rows.size() - 1);
        for (std::size_t v = 0; v < rows.size(); ++v) {
          if (v != u) cands.push_back({v, cache.cosine(rows[u], rows[v])});
        }
        rank_candidates(cands, ids, max_k);
        for (const auto& c : cands) peers[u].push_back(c.index);
      }
    }

    for (std::size_t r = 0; r < ks.size(); ++r) {
      const auto k = ks[r];
      YearCorrelation y;
      y.year = year;
      y.universe = rows.size();
      reports[r].missing += missing;
      if (rows.size() < k + 1) {
        y.skip_reason = "universe of " + std::to_string(rows.size()) + " companies is too small for k=" +
                        std::to_string(k);
        reports[r].years.push_back(std::move(y));
        continue;
      }
      for (std::size_t u = 0; u < rows.size(); ++u) {
        const std::span<const std::size_t> top(peers[u].data(), k);
        if (auto m = mean_rho(universe, u, top)) {
          y.per_company.emplace(ids[u], *m);
        } else {
          ++y.excluded;
        }
      }
      finish_year(y);
      reports[r].years.push_back(std::move(y));
    }
  }
  for (auto& r : reports) finish_report(r);
  return reports;
}

CorrelationReport avg_peer_correlation(const EmbeddingMatrix& matrix, const ReturnsMap& returns, std::size_t k,
                                       std::span<const int> years, const CorrelationOptions& options) {
  const std::size_t ks[] = {k};
  return std::move(avg_peer_correlation(matrix, returns, ks, years, options).front());
}

CorrelationReport class_baseline_correlation(const std::map<std::string, std::string>& classes,
                                             const ReturnsMap& returns, std::span<const int> years,
                                             const CorrelationOptions& options, std::string method) {
  if (years.empty()) throw ArgumentError("baseline correlation: no years given");
  std::map<std::string, std::size_t> class_size;
  for (const auto& [id, c] : classes) ++class_size[c];
  if (std::all_of(class_size.begin(), class_size.end(), [](const auto& kv) { return kv.second < 2; })) {
    throw ComputeError(method + ": every class is a singleton");
  }

  CorrelationReport report;
  report.method = std::move(method);
  for (int year : years) {
    const auto window = calendar_year(year);
    std::vector<std::string> ids;
    std::vector<std::span<const ReturnObservation>> series;
    std::map<std::string, std::vector<std::size_t>> members;
    for (const auto& [id, c] : classes) {
      const auto it = returns.find(id);
      if (it == returns.end()) {
        ++report.missing;
        continue;
      }
      auto view = window_view(it->second, window);
      if (view.size() < std::max<std::size_t>(options.min_overlap, 2)) {
        ++report.missing;
        continue;
      }
      members[c].push_back(ids.size());
      ids.push_back(id);
      series.push_back(view);
    }
    YearUniverse universe(ids, series, options.min_overlap);
    YearCorrelation y;
    y.year = year;
    y.universe = ids.size();
    for (const auto& [c, group] : members) {
      for (auto u : group) {
        std::vector<std::size_t> peers;
        for (auto v : group) {
          if (v != u) peers.push_back(v);
        }
        std::optional<double> m;
        if (!peers.empty()) m = mean_rho(universe, u, peers);
        if (m) {
          y.per_company.emplace(ids[u], *m);
        } else {
          ++y.excluded;
        }
      }
    }
    finish_year(y);
    report.years.push_back(std::move(y));
  }
  finish_report(report);
  return report;
}

CorrelationReport gics_baseline_correlation(const Corpus& corpus, const ReturnsMap& returns, GicsLevel level,
                                            std::span<const int> years, const CorrelationOptions& options) {
  return class_baseline_correlation(corpus.labels(level), returns, years, options,
                                    "gics-" + std::string(to_string(level)));
}

void write_correlation_report(std::ostream& out, std::span<const CorrelationReport> reports) {
  csv::write_row(out, {"method", "k", "avg_pairwise_correlation", "coverage", "excluded", "missing",
                       "years_scored"});
  for (const auto& r : reports) {
    std::size_t scored = 0;
    for (const auto& y : r.years) scored += y.scored ? 1 : 0;
    csv::write_row(out, {r.method, r.k_label(), csv::format_double(r.rho_bar), std::to_string(r.coverage),
                         std::to_string(r.excluded), std::to_string(r.missing), std::to_string(scored)});
  }
}

} // namespace compsim
