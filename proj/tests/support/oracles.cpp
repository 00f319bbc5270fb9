#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace compsim::testing {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double scalar_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  return dot(a, b) / (std::sqrt(dot(a, a)) * std::sqrt(dot(b, b)));
}

double scalar_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double brute_force_rho_bar(const std::map<std::string, std::vector<double>>& embeddings,
                           const std::map<std::string, std::vector<DatedValue>>& returns, std::size_t k,
                           const std::vector<std::pair<int, int>>& years, std::size_t min_overlap) {
  double total = 0.0;
  int scored_years = 0;
  for (const auto& [first, last] : years) {
    std::map<std::string, std::map<int, double>> in_year;
    for (const auto& [id, vec] : embeddings) {
      auto it = returns.find(id);
      if (it == returns.end() || dot(vec, vec) == 0.0) continue;
      std::map<int, double> obs;
      for (const auto& dv : it->second) {
        if (dv.day >= first && dv.day <= last) obs[dv.day] = dv.value;
      }
      if (obs.size() >= std::max<std::size_t>(min_overlap, 2)) in_year[id] = std::move(obs);
    }
    if (in_year.size() < k + 1) continue;

    double year_sum = 0.0;
    int companies = 0;
    for (const auto& [id, obs] : in_year) {
      std::vector<std::pair<double, std::string>> all;
      for (const auto& [other, _] : in_year) {
        if (other != id) all.push_back({scalar_cosine(embeddings.at(id), embeddings.at(other)), other});
      }
      std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      double sum = 0.0;
      int ok = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const auto& peer = in_year.at(all[j].second);
        std::vector<double> a, b;
        for (const auto& [day, v] : obs) {
          if (auto p = peer.find(day); p != peer.end()) {
            a.push_back(v);
            b.push_back(p->second);
          }
        }
        if (a.size() < min_overlap || a.size() < 2) continue;
        const double rho = scalar_pearson(a, b);
        if (!std::isfinite(rho)) continue;
        sum += std::clamp(rho, -1.0, 1.0);
        ++ok;
      }
      if (ok == 0) continue;
      year_sum += sum / ok;
      ++companies;
    }
    if (companies == 0) continue;
    total += year_sum / companies;
    ++scored_years;
  }
  if (scored_years == 0) throw std::runtime_error("oracle: nothing scored");
  return total / scored_years;
}

std::vector<double> gauss_solve(std::vector<double> A, std::vector<double> b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r * n + col]) > std::abs(A[pivot * n + col])) pivot = r;
    }
    if (A[pivot * n + col] == 0.0) throw std::runtime_error("oracle: singular system");
    for (std::size_t c = 0; c < n; ++c) std::swap(A[col * n + c], A[pivot * n + c]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r * n + col] / A[col * n + col];
      for (std::size_t c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= A[i * n + c] * x[c];
    x[i] = s / A[i * n + i];
  }
  return x;
}

OlsSolution normal_equations_ols(const std::vector<double>& y, const std::vector<int>& cluster) {
  const std::set<int> present(cluster.begin(), cluster.end());
  std::vector<int> columns(present.begin(), present.end());
  const std::size_t p = columns.size();  // intercept + (p - 1) dummies
  const std::size_t n = y.size();
  auto x = [&](std::size_t i, std::size_t j) -> double {
    if (j == 0) return 1.0;
    return cluster[i] == columns[j] ? 1.0 : 0.0;
  };
  std::vector<double> XtX(p * p, 0.0), Xty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      Xty[a] += x(i, a) * y[i];
      for (std::size_t b = 0; b < p; ++b) XtX[a * p + b] += x(i, a) * x(i, b);
    }
  }
  OlsSolution out;
  out.beta = gauss_solve(XtX, Xty, p);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fitted = 0.0;
    for (std::size_t a = 0; a < p; ++a) fitted += x(i, a) * out.beta[a];
    out.residuals.push_back(y[i] - fitted);
    ss_res += (y[i] - fitted) * (y[i] - fitted);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  out.r2 = 1.0 - ss_res / ss_tot;
  return out;
}

EntropyScores entropy_scores(const std::vector<std::vector<double>>& table) {
  const std::size_t C = table.size();
  const std::size_t K = table.front().size();
  double N = 0.0;
  std::vector<double> nc(C, 0.0), nk(K, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K; ++k) {
      N += table[c][k];
      nc[c] += table[c][k];
      nk[k] += table[c][k];
    }
  }
  auto h = [&](const std::vector<double>& counts) {
    double s = 0.0;
    for (double v : counts) {
      if (v > 0) s -= v / N * std::log2(v / N);
    }
    return s;
  };
  double hc_k = 0.0, hk_c = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K; ++k) {
      const double v = table[c][k];
      if (v == 0) continue;
      hc_k -= v / N * std::log2(v / nk[k]);
      hk_c -= v / N * std::log2(v / nc[c]);
    }
  }
  const double hc = h(nc), hk = h(nk);
  return {hc == 0 ? 1.0 : 1.0 - hc_k / hc, hk == 0 ? 1.0 : 1.0 - hk_c / hk};
}

double silhouette(const std::vector<std::vector<double>>& points, const std::vector<std::string>& labels) {
  const std::size_t n = points.size();
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t d = 0; d < points[i].size(); ++d) s += (points[i][d] - points[j][d]) * (points[i][d] - points[j][d]);
    return std::sqrt(s);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::string, std::pair<double, int>> by_label;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto& e = by_label[labels[j]];
      e.first += dist(i, j);
      e.second += 1;
    }
    const auto own = by_label.find(labels[i]);
    if (own == by_label.end()) continue;  // singleton: silhouette 0
    const double a = own->second.first / own->second.second;
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, e] : by_label) {
      if (label != labels[i]) b = std::min(b, e.first / e.second);
    }
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

} // namespace compsim::testing
