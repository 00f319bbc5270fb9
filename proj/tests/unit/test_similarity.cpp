#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "compsim/error.hpp"
#include "compsim/similarity.hpp"
#include "oracles.hpp"

using namespace compsim;
namespace ct = compsim::testing;

namespace {

EmbeddingMatrix matrix_of(const std::map<std::string, std::vector<double>>& rows) {
  std::vector<std::string> ids;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->second.size()));
  Eigen::Index r = 0;
  for (const auto& [id, v] : rows) {
    ids.push_back(id);
    for (std::size_t c = 0; c < v.size(); ++c) m(r, static_cast<Eigen::Index>(c)) = v[c];
    ++r;
  }
  return EmbeddingMatrix("test", 0, ids, m);
}

std::vector<Date> business_days(int year) {
  std::vector<Date> out;
  const auto range = calendar_year(year);
  for (auto d = range.first; d <= range.last; d += std::chrono::days{1}) {
    const std::chrono::weekday wd{d};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
  }
  return out;
}

ReturnSeries series(const std::string& id, const std::vector<Date>& dates, const std::vector<double>& values) {
  std::vector<ReturnObservation> obs;
  for (std::size_t i = 0; i < dates.size(); ++i) obs.push_back({dates[i], values[i]});
  return ReturnSeries(id, obs);
}

struct Universe {
  std::map<std::string, std::vector<double>> embeddings;
  ReturnsMap returns;
  std::map<std::string, std::vector<ct::DatedValue>> oracle_returns;
};

// n companies in g groups; returns = group factor + noise with random gaps
Universe random_universe(int n, int g, unsigned seed, const std::vector<int>& years) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Universe u;
  std::vector<Date> dates;
  for (int y : years) {
    const auto d = business_days(y);
    dates.insert(dates.end(), d.begin(), d.end());
  }
  std::vector<std::vector<double>> factors(static_cast<std::size_t>(g));
  for (auto& f : factors) {
    for (std::size_t i = 0; i < dates.size(); ++i) f.push_back(0.01 * normal(gen));
  }
  for (int i = 0; i < n; ++i) {
    const std::string id = "C" + std::to_string(100 + i);
    std::vector<double> e(6);
    for (auto& x : e) x = normal(gen);
    e[static_cast<std::size_t>(i % g)] += 2.0;
    u.embeddings[id] = e;
    std::vector<Date> ds;
    std::vector<double> vs;
    const double gap = i % 5 == 0 ? 0.3 : 0.02;
    for (std::size_t t = 0; t < dates.size(); ++t) {
      if (unit(gen) < gap) continue;
      ds.push_back(dates[t]);
      vs.push_back(factors[static_cast<std::size_t>(i % g)][t] + 0.01 * normal(gen));
      u.oracle_returns[id].push_back({static_cast<int>(dates[t].time_since_epoch().count()), vs.back()});
    }
    u.returns.emplace(id, series(id, ds, vs));
  }
  return u;
}

std::vector<std::pair<int, int>> oracle_years(const std::vector<int>& years) {
  std::vector<std::pair<int, int>> out;
  for (int y : years) {
    const auto r = calendar_year(y);
    out.push_back({static_cast<int>(r.first.time_since_epoch().count()), static_cast<int>(r.last.time_since_epoch().count())});
  }
  return out;
}

} // namespace

TEST(Cosine, AnalyticValues) {
  EXPECT_DOUBLE_EQ(cosine_similarity(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0)), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), 0.0);
  EXPECT_NEAR(cosine_similarity(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 0)), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(cosine_similarity(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)), std::invalid_argument);
  EXPECT_THROW(cosine_similarity(Eigen::Vector2d(1, 0), Eigen::Vector3d(1, 0, 0)), std::invalid_argument);
}

TEST(TopK, ScalarMultipleIsTopPeer) {
  const auto m = matrix_of({{"A", {1, 2, 3}}, {"B", {2, 4, 6}}, {"C", {3, -1, 0}}});
  const auto peers = top_k_peers(m, "A", 1);
  ASSERT_EQ(peers.neighbors.size(), 1u);
  EXPECT_EQ(peers.neighbors[0].company_id, "B");
  EXPECT_NEAR(peers.neighbors[0].similarity, 1.0, 1e-15);
}

TEST(TopK, TieGoesToSmallerId) {
  const auto m = matrix_of({{"Q", {1, 0}}, {"Z", {0, 1}}, {"M", {0, 1}}, {"X", {-1, 0}}});
  const auto peers = top_k_peers(m, "Q", 2);
  EXPECT_EQ(peers.neighbors[0].company_id, "M");
  EXPECT_EQ(peers.neighbors[1].company_id, "Z");
}

TEST(TopK, MatchesBruteForceOnRandomVectors) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  std::map<std::string, std::vector<double>> rows;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(8);
    for (auto& x : v) x = normal(gen);
    rows["R" + std::to_string(i)] = v;
  }
  const auto m = matrix_of(rows);
  for (const auto& [q, qv] : rows) {
    std::vector<std::pair<double, std::string>> all;
    for (const auto& [id, v] : rows) {
      if (id != q) all.push_back({ct::scalar_cosine(qv, v), id});
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const auto peers = top_k_peers(m, q, 5);
    ASSERT_EQ(peers.neighbors.size(), 5u);
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(peers.neighbors[j].company_id, all[j].second);
      EXPECT_NEAR(peers.neighbors[j].similarity, all[j].first, 1e-12);
    }
  }
}

TEST(TopK, InvariantToPositiveRescaling) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  std::map<std::string, std::vector<double>> rows, scaled;
  for (int i = 0; i < 30; ++i) {
    std::vector<double> v(5);
    for (auto& x : v) x = normal(gen);
    rows["R" + std::to_string(i)] = v;
    const double s = scale(gen);
    for (auto& x : v) x *= s;
    scaled["R" + std::to_string(i)] = v;
  }
  const auto a = matrix_of(rows);
  const auto b = matrix_of(scaled);
  for (const auto& id : a.ids()) {
    const auto pa = top_k_peers(a, id, 10);
    const auto pb = top_k_peers(b, id, 10);
    for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(pa.neighbors[j].company_id, pb.neighbors[j].company_id);
  }
}

TEST(TopK, PostconditionsAndErrors) {
  const auto m = matrix_of({{"A", {1, 0}}, {"B", {1, 1}}, {"C", {0, 1}}, {"D", {0, 0}}});
  const auto peers = top_k_peers(m, "A", 2);
  for (const auto& p : peers.neighbors) {
    EXPECT_NE(p.company_id, "A");
    EXPECT_NE(p.company_id, "D");
  }
  EXPECT_GE(peers.neighbors[0].similarity, peers.neighbors[1].similarity);
  EXPECT_THROW(top_k_peers(m, "nope", 1), std::invalid_argument);
  EXPECT_THROW(top_k_peers(m, "A", 0), std::invalid_argument);
  EXPECT_THROW(top_k_peers(m, "A", 4), std::invalid_argument);
}

TEST(Pearson, IdentityAntiAndOracle) {
  const auto dates = business_days(2021);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  std::vector<double> a, neg, b;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    a.push_back(0.01 * normal(gen));
    neg.push_back(-a.back());
    b.push_back(0.5 * a.back() + 0.01 * normal(gen));
  }
  const auto sa = series("a", dates, a);
  const auto year = calendar_year(2021);
  EXPECT_NEAR(pairwise_return_correlation(sa, sa, year), 1.0, 1e-12);
  EXPECT_NEAR(pairwise_return_correlation(sa, series("n", dates, neg), year), -1.0, 1e-12);
  EXPECT_NEAR(pairwise_return_correlation(sa, series("b", dates, b), year), ct::scalar_pearson(a, b), 1e-12);
}

TEST(Pearson, FiveDayOracle) {
  const auto dates = business_days(2022);
  const std::vector<Date> five(dates.begin(), dates.begin() + 5);
  const std::vector<double> a = {0.01, -0.02, 0.015, 0.0, 0.03};
  const std::vector<double> b = {0.005, -0.01, 0.02, -0.004, 0.01};
  EXPECT_NEAR(pairwise_return_correlation(series("a", five, a), series("b", five, b), calendar_year(2022), 5),
              ct::scalar_pearson(a, b), 1e-12);
}

TEST(Pearson, AffineInvariance) {
  const auto dates = business_days(2021);
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  std::vector<double> a, b, a2;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    a.push_back(0.01 * normal(gen));
    b.push_back(0.01 * normal(gen) + a.back());
    a2.push_back(0.001 + 3.0 * a.back());
  }
  const auto y = calendar_year(2021);
  EXPECT_NEAR(pairwise_return_correlation(series("a", dates, a), series("b", dates, b), y),
              pairwise_return_correlation(series("a", dates, a2), series("b", dates, b), y), 1e-12);
}

TEST(Pearson, Errors) {
  const auto dates = business_days(2021);
  const std::vector<Date> few(dates.begin(), dates.begin() + 10);
  const std::vector<double> v = {0.1, 0.2, 0.1, 0.3, 0.0, 0.1, 0.2, 0.1, 0.3, 0.0};
  try {
    pairwise_return_correlation(series("a", few, v), series("b", few, v), calendar_year(2021));
    FAIL();
  } catch (const CorrelationError& e) {
    EXPECT_EQ(e.kind(), CorrelationError::Kind::InsufficientOverlap);
  }
  try {
    pairwise_return_correlation(series("a", few, v), series("b", few, std::vector<double>(10, 0.01)),
                                calendar_year(2021), 5);
    FAIL();
  } catch (const CorrelationError& e) {
    EXPECT_EQ(e.kind(), CorrelationError::Kind::ZeroVariance);
  }
}

TEST(AvgPeerCorrelation, IdenticalPairIsOne) {
  const auto dates = business_days(2021);
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal;
  std::vector<double> v;
  for (std::size_t i = 0; i < dates.size(); ++i) v.push_back(0.01 * normal(gen));
  ReturnsMap r;
  r.emplace("A", series("A", dates, v));
  r.emplace("B", series("B", dates, v));
  const auto m = matrix_of({{"A", {1, 0}}, {"B", {1, 1}}});
  const std::vector<int> years = {2021};
  const auto report = avg_peer_correlation(m, r, 1, years);
  EXPECT_NEAR(report.rho_bar, 1.0, 1e-12);
}

class OracleUniverse : public ::testing::TestWithParam<unsigned> {};

TEST_P(OracleUniverse, EqualsExhaustiveOracle) {
  const std::vector<int> years = {2020, 2021};
  const auto u = random_universe(10 + static_cast<int>(GetParam()) * 5, 3, GetParam(), years);
  const auto m = matrix_of(u.embeddings);
  for (std::size_t k : {1u, 3u, 5u}) {
    const auto report = avg_peer_correlation(m, u.returns, k, years);
    const double oracle = ct::brute_force_rho_bar(u.embeddings, u.oracle_returns, k, oracle_years(years), 60);
    EXPECT_NEAR(report.rho_bar, oracle, 1e-12) << "k=" << k;
    for (const auto& y : report.years) {
      double s = 0.0;
      for (const auto& [id, rho] : y.per_company) {
        EXPECT_GE(rho, -1.0);
        EXPECT_LE(rho, 1.0);
        s += rho;
      }
      if (y.scored) EXPECT_NEAR(y.rho_bar, s / static_cast<double>(y.per_company.size()), 1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, OracleUniverse, ::testing::Values(1u, 2u, 3u, 4u));

TEST(AvgPeerCorrelation, MultiKMatchesSingleK) {
  const std::vector<int> years = {2021};
  const auto u = random_universe(20, 4, 9, years);
  const auto m = matrix_of(u.embeddings);
  const std::vector<std::size_t> ks = {1, 4, 8};
  const auto reports = avg_peer_correlation(m, u.returns, ks, years);
  ASSERT_EQ(reports.size(), 3u);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    EXPECT_DOUBLE_EQ(reports[i].rho_bar, avg_peer_correlation(m, u.returns, ks[i], years).rho_bar);
  }
}

TEST(AvgPeerCorrelation, CloseIndicatorPeersBeatDistantOnes) {
  // embeddings equal group indicators; returns = group factor + noise
  int wins = 0;
  for (unsigned seed = 0; seed < 5; ++seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    const std::vector<int> years = {2021};
    const auto dates = business_days(2021);
    std::map<std::string, std::vector<double>> emb;
    ReturnsMap r;
    std::vector<std::vector<double>> f(4);
    for (auto& x : f) {
      for (std::size_t t = 0; t < dates.size(); ++t) x.push_back(normal(gen));
    }
    for (int i = 0; i < 24; ++i) {
      const std::string id = "C" + std::to_string(10 + i);
      std::vector<double> e(4, 0.0);
      e[static_cast<std::size_t>(i % 4)] = 1.0;
      e[(static_cast<std::size_t>(i % 4) + 1) % 4] = 0.01 * (i % 7);
      emb[id] = e;
      std::vector<double> v;
      for (std::size_t t = 0; t < dates.size(); ++t) v.push_back(0.01 * (f[static_cast<std::size_t>(i % 4)][t] + normal(gen)));
      r.emplace(id, series(id, dates, v));
    }
    const auto m = matrix_of(emb);
    const double k1 = avg_peer_correlation(m, r, 1, years).rho_bar;
    const double k20 = avg_peer_correlation(m, r, 20, years).rho_bar;
    if (k1 > k20 + 0.1) ++wins;
  }
  EXPECT_EQ(wins, 5);
}

TEST(AvgPeerCorrelation, MissingReturnsAreCounted) {
  const std::vector<int> years = {2021};
  auto u = random_universe(12, 3, 11, years);
  u.embeddings["ZZZ"] = std::vector<double>(6, 1.0);
  const auto m = matrix_of(u.embeddings);
  const auto report = avg_peer_correlation(m, u.returns, 2, years);
  EXPECT_EQ(report.missing, 1u);
  ReturnsMap none;
  EXPECT_THROW(avg_peer_correlation(m, none, 2, years), std::exception);
}

TEST(ClassBaseline, HandEnumeratedThreeCompanies) {
  const std::vector<int> years = {2021};
  const auto u = random_universe(3, 3, 12, years);
  std::map<std::string, std::string> classes;
  for (const auto& [id, _] : u.embeddings) classes[id] = "X";
  const auto year = calendar_year(2021);
  const auto& a = u.returns.at("C100");
  const auto& b = u.returns.at("C101");
  const auto& c = u.returns.at("C102");
  const double ab = pairwise_return_correlation(a, b, year);
  const double ac = pairwise_return_correlation(a, c, year);
  const double bc = pairwise_return_correlation(b, c, year);
  const double want = ((ab + ac) / 2 + (ab + bc) / 2 + (ac + bc) / 2) / 3;
  const auto report = class_baseline_correlation(classes, u.returns, years);
  EXPECT_NEAR(report.rho_bar, want, 1e-12);
  EXPECT_FALSE(report.k.has_value());
  EXPECT_EQ(report.k_label(), "dynamic");
}

TEST(ClassBaseline, SingletonsExcludedAndAllSingletonsFail) {
  const std::vector<int> years = {2021};
  const auto dates = business_days(2021);
  std::mt19937_64 gen(13);
  std::normal_distribution<double> normal;
  std::vector<double> v, w;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    v.push_back(0.01 * normal(gen));
    w.push_back(0.01 * normal(gen));
  }
  ReturnsMap r;
  r.emplace("A", series("A", dates, v));
  r.emplace("B", series("B", dates, v));
  r.emplace("C", series("C", dates, w));
  const auto report = class_baseline_correlation({{"A", "x"}, {"B", "x"}, {"C", "y"}}, r, years);
  EXPECT_NEAR(report.rho_bar, 1.0, 1e-12);
  EXPECT_EQ(report.excluded, 1u);
  EXPECT_THROW(class_baseline_correlation({{"A", "x"}, {"C", "y"}}, r, years), std::exception);
}

TEST(CorrelationReport, CsvLayout) {
  const std::vector<int> years = {2021};
  const auto u = random_universe(8, 2, 14, years);
  const auto m = matrix_of(u.embeddings);
  const std::vector<CorrelationReport> reports = {avg_peer_correlation(m, u.returns, 1, years)};
  std::ostringstream out;
  write_correlation_report(out, reports);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "method,k,avg_pairwise_correlation,coverage,excluded,missing,years_scored");
}
