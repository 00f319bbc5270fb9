#pragma once

// Cosine peer retrieval and the average peer return-correlation metric.
//
// For company i with top-k embedding peers j_1..j_k, rho_i is the mean of
// the Pearson correlations of daily returns between i and each peer; the
// universe score is the mean of rho_i over scored companies. Scores are
// computed per calendar year and averaged over years with equal weight.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "compsim/corpus.hpp"
#include "compsim/embed.hpp"
#include "compsim/returns.hpp"

namespace compsim {

/// u.v / (|u||v|) clamped to [-1, 1]. Throws ArgumentError on a zero vector
/// or mismatched dimensions.
double cosine_similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct Peer {
  std::string company_id;
  double similarity = 0.0;
};

struct PeerList {
  std::string query_id;
  std::vector<Peer> neighbors;  // similarity non-increasing, ties by id
};

/// Exact full scan. Rows with zero norm are never returned as peers.
PeerList top_k_peers(const EmbeddingMatrix& matrix, const std::string& query_id, std::size_t k);

class CorrelationError : public std::runtime_error {
public:
  enum class Kind { InsufficientOverlap, ZeroVariance };
  CorrelationError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Pearson correlation over the dates both series share inside `window`.
double pairwise_return_correlation(const ReturnSeries& a, const ReturnSeries& b, const DateRange& window,
                                   std::size_t min_overlap = 60);

struct CorrelationOptions {
  std::size_t min_overlap = 60;
};

struct YearCorrelation {
  int year = 0;
  bool scored = false;
  std::string skip_reason;
  double rho_bar = 0.0;                        // mean of per_company
  std::map<std::string, double> per_company;   // rho_i
  std::size_t universe = 0;                    // companies eligible this year
  std::size_t excluded = 0;                    // eligible but no usable peer correlation
};

struct CorrelationReport {
  std::string method;
  std::optional<std::size_t> k;  // empty = dynamic (class size)
  double rho_bar = 0.0;          // mean over scored years
  std::vector<YearCorrelation> years;
  std::size_t coverage = 0;      // scored company-years
  std::size_t excluded = 0;      // company-years excluded
  std::size_t missing = 0;       // ids without usable returns, summed over years

  std::string k_label() const;
};

CorrelationReport avg_peer_correlation(const EmbeddingMatrix& matrix, const ReturnsMap& returns,
                                       std::size_t k, std::span<const int> years,
                                       const CorrelationOptions& options = {});

/// Same metric for several k values; peers and correlations are shared.
std::vector<CorrelationReport> avg_peer_correlation(const EmbeddingMatrix& matrix, const ReturnsMap& returns,
                                                    std::span<const std::size_t> ks,
                                                    std::span<const int> years,
                                                    const CorrelationOptions& options = {});

/// Dynamic-k baseline: the peers of a company are all other companies in
/// its GICS class at `level`.
CorrelationReport gics_baseline_correlation(const Corpus& corpus, const ReturnsMap& returns, GicsLevel level,
                                            std::span<const int> years, const CorrelationOptions& options = {});

/// Same baseline from an explicit company -> class map.
CorrelationReport class_baseline_correlation(const std::map<std::string, std::string>& classes,
                                             const ReturnsMap& returns, std::span<const int> years,
                                             const CorrelationOptions& options = {},
                                             std::string method = "classes");

/// CSV: method,k,avg_pairwise_correlation,coverage,excluded,missing,years_scored
void write_correlation_report(std::ostream& out, std::span<const CorrelationReport> reports);

} // namespace compsim
