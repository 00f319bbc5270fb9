#pragma once

// Seeded synthetic universes: companies with planted sector/industry
// vocabularies and returns driven by an industry factor.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "compsim/corpus.hpp"
#include "compsim/returns.hpp"

namespace compsim {

struct SyntheticOptions {
  std::size_t n_companies = 300;
  std::size_t n_sectors = 6;
  std::size_t industries_per_sector = 2;  // one industry group per sector, one sub-industry per industry
  std::size_t words_per_description = 600;
  std::size_t sector_vocabulary = 40;
  std::size_t industry_vocabulary = 30;
  std::size_t common_vocabulary = 300;
  double sector_word_share = 0.2;
  double industry_word_share = 0.1;  // remainder drawn from the common vocabulary
  bool plant_outlier = false;        // last company of sector 0 writes like sector 1
  bool with_returns = true;
  int first_year = 2021;  // returns start here; the corpus fiscal year is the one before
  int n_years = 1;
  double signal_share = 0.3;  // variance share of the industry factor
  double daily_vol = 0.015;
  std::uint64_t seed = 0;
};

struct SyntheticUniverse {
  Corpus corpus;
  ReturnsMap returns;
  std::optional<std::string> outlier_id;
};

/// Companies are dealt round-robin over industries, so every industry has at
/// least floor(n_companies / n_industries) members.
SyntheticUniverse make_synthetic_universe(const SyntheticOptions& options);

/// Sector code of the s-th synthetic sector ("10", "15", ...).
std::string synthetic_sector_code(std::size_t s);

} // namespace compsim
