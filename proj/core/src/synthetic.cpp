#include "compsim/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <vector>

#include "compsim/error.hpp"
#include "compsim/random.hpp"

namespace compsim {

namespace {

// Pronounceable pseudo-words, unique per (prefix, index).
std::string make_word(char prefix, std::size_t index) {
  static constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u"};
  std::string w(1, prefix);
  std::size_t x = index;
  do {
    w += kOnsets[x % 14];
    x /= 14;
    w += kVowels[x % 5];
    x /= 5;
  } while (x > 0);
  return w;
}

std::vector<std::string> vocabulary(char prefix, std::size_t offset, std::size_t size) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < size; ++i) out.push_back(make_word(prefix, offset + i));
  return out;
}

std::string pad2(std::size_t v) { return (v < 10 ? "0" : "") + std::to_string(v); }

std::string describe(const std::vector<std::string>& sector_words, const std::vector<std::string>& industry_words,
                     const std::vector<std::string>& common_words, const SyntheticOptions& o, Rng& rng) {
  std::string text;
  for (std::size_t i = 0; i < o.words_per_description; ++i) {
    const double u = uniform_unit(rng);
    const std::vector<std::string>* pool = &common_words;
    if (u < o.sector_word_share) {
      pool = &sector_words;
    } else if (u < o.sector_word_share + o.industry_word_share) {
      pool = &industry_words;
    }
    if (pool->empty()) pool = &sector_words;
    if (!text.empty()) text += ' ';
    text += (*pool)[uniform_index(rng, pool->size())];
    if (i % 15 == 14) text += '.';
  }
  return text;
}

} // namespace

std::string synthetic_sector_code(std::size_t s) { return std::to_string(10 + 5 * s); }

SyntheticUniverse make_synthetic_universe(const SyntheticOptions& o) {
  if (o.n_sectors < 1 || o.industries_per_sector < 1) throw ArgumentError("synthetic: need sectors and industries");
  if (o.n_sectors > 18 || o.industries_per_sector > 89) throw ArgumentError("synthetic: too many classes");
  if (o.n_companies < 1) throw ArgumentError("synthetic: need companies");
  if (o.sector_vocabulary < 1 || o.words_per_description < 1) throw ArgumentError("synthetic: empty vocabulary");
  if (o.plant_outlier && o.n_sectors < 2) throw ArgumentError("synthetic: outlier needs two sectors");
  if (!(o.signal_share >= 0.0 && o.signal_share <= 1.0)) throw ArgumentError("synthetic: signal share outside [0, 1]");

  const std::size_t n_industries = o.n_sectors * o.industries_per_sector;
  GicsHierarchy hierarchy;
  std::vector<GicsLabels> industry_labels;
  for (std::size_t s = 0; s < o.n_sectors; ++s) {
    const auto sector = synthetic_sector_code(s);
    const auto group = sector + "10";
    for (std::size_t i = 0; i < o.industries_per_sector; ++i) {
      const auto industry = group + pad2(10 + i);
      const auto sub = industry + "10";
      hierarchy.add_row(sector, group, industry, sub);
      industry_labels.push_back({{sector, "Sector " + std::to_string(s + 1)},
                                 {group, "Group " + std::to_string(s + 1)},
                                 {industry, "Industry " + std::to_string(s + 1) + "." + std::to_string(i + 1)},
                                 {sub, "Sub-Industry " + std::to_string(s + 1) + "." + std::to_string(i + 1)}});
    }
  }

  std::vector<std::vector<std::string>> sector_words, industry_words;
  for (std::size_t s = 0; s < o.n_sectors; ++s) {
    sector_words.push_back(vocabulary('s', s * o.sector_vocabulary, o.sector_vocabulary));
  }
  for (std::size_t i = 0; i < n_industries; ++i) {
    industry_words.push_back(vocabulary('q', i * o.industry_vocabulary, o.industry_vocabulary));
  }
  const auto common_words = vocabulary('c', 0, o.common_vocabulary);

  const int width = static_cast<int>(std::to_string(o.n_companies).size());
  Rng text_rng(derive_seed(o.seed, 1));
  SyntheticUniverse out;
  std::vector<CompanyRecord> records;
  std::vector<std::size_t> industry_of;
  for (std::size_t c = 0; c < o.n_companies; ++c) {
    const std::size_t ind = c % n_industries;
    const std::size_t sec = ind / o.industries_per_sector;
    std::string number = std::to_string(c + 1);
    number.insert(0, static_cast<std::size_t>(width) - number.size(), '0');
    CompanyRecord r;
    r.company_id = "C" + number;
    r.name = "Synthetic Company " + number;
    r.gics = industry_labels[ind];
    std::size_t vocab_sector = sec;
    if (o.plant_outlier && sec == 0 && c + n_industries >= o.n_companies) {
      // the last company dealt into sector 0
      bool last = true;
      for (std::size_t later = c + 1; later < o.n_companies; ++later) {
        if ((later % n_industries) / o.industries_per_sector == 0) last = false;
      }
      if (last) {
        vocab_sector = 1;
        out.outlier_id = r.company_id;
      }
    }
    const auto& iw = vocab_sector == sec ? industry_words[ind] : industry_words[vocab_sector * o.industries_per_sector];
    r.description = describe(sector_words[vocab_sector], iw, common_words, o, text_rng);
    records.push_back(std::move(r));
    industry_of.push_back(ind);
  }

  if (o.with_returns) {
    using namespace std::chrono;
    const Date first = sys_days{year{o.first_year} / January / 1};
    const Date end = sys_days{year{o.first_year + o.n_years} / January / 1};
    std::vector<Date> dates;
    for (Date d = first; d < end; d += std::chrono::days{1}) {
      const weekday wd{d};
      if (wd != Saturday && wd != Sunday) dates.push_back(d);
    }
    Rng factor_rng(derive_seed(o.seed, 2));
    std::vector<std::vector<double>> factor(n_industries, std::vector<double>(dates.size()));
    for (auto& f : factor) {
      for (double& v : f) v = standard_normal(factor_rng);
    }
    const double a = std::sqrt(o.signal_share) * o.daily_vol;
    const double b = std::sqrt(1.0 - o.signal_share) * o.daily_vol;
    for (std::size_t c = 0; c < records.size(); ++c) {
      Rng noise_rng(derive_seed(o.seed, 1000 + c));
      std::vector<ReturnObservation> obs;
      obs.reserve(dates.size());
      for (std::size_t t = 0; t < dates.size(); ++t) {
        const double r = a * factor[industry_of[c]][t] + b * standard_normal(noise_rng);
        obs.push_back({dates[t], std::max(r, -0.99)});
      }
      out.returns.emplace(records[c].company_id, ReturnSeries(records[c].company_id, std::move(obs)));
    }
  }

  out.corpus = Corpus(std::move(records), std::move(hierarchy), o.first_year - 1);
  return out;
}

} // namespace compsim
