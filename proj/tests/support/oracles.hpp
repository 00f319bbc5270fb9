#pragma once

// Independent reference computations used by tests. Written with plain
// loops over std::vector so they share no code with the library.

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace compsim::testing {

double dot(const std::vector<double>& a, const std::vector<double>& b);
double scalar_cosine(const std::vector<double>& a, const std::vector<double>& b);
double scalar_pearson(const std::vector<double>& a, const std::vector<double>& b);

struct DatedValue {
  int day;  // days since epoch
  double value;
};

/// Exhaustive peer-correlation metric: enumerate every pair, sort by cosine
/// (ties by id), average Pearson correlations of the k best, then average
/// over companies and over years. `years` are given as [first_day, last_day].
double brute_force_rho_bar(const std::map<std::string, std::vector<double>>& embeddings,
                           const std::map<std::string, std::vector<DatedValue>>& returns, std::size_t k,
                           const std::vector<std::pair<int, int>>& years, std::size_t min_overlap);

struct OlsSolution {
  std::vector<double> beta;  // intercept, then one coefficient per non-reference cluster (ascending)
  std::vector<double> residuals;
  double r2 = 0.0;
};

/// Intercept + dummy OLS via explicit normal equations and Gaussian
/// elimination. The smallest cluster index is the reference.
OlsSolution normal_equations_ols(const std::vector<double>& y, const std::vector<int>& cluster);

/// Solves A x = b (A row-major n x n) with partial pivoting.
std::vector<double> gauss_solve(std::vector<double> A, std::vector<double> b, std::size_t n);

struct EntropyScores {
  double homogeneity;
  double completeness;
};
/// table[c][k] = members of class c in cluster k.
EntropyScores entropy_scores(const std::vector<std::vector<double>>& table);

/// Mean silhouette over all points (Euclidean).
double silhouette(const std::vector<std::vector<double>>& points, const std::vector<std::string>& labels);

} // namespace compsim::testing
