#pragma once

// Company universe: records, GICS hierarchy, Item 1 extraction, stratified
// splitting and finetuning pair generation.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace compsim {

enum class GicsLevel { Sector, IndustryGroup, Industry, SubIndustry };

std::string_view to_string(GicsLevel level);
/// Accepts "sector", "industry_group", "industry", "sub_industry".
GicsLevel parse_gics_level(std::string_view text);

struct Category {
  std::string code;
  std::string name;  // optional display name

  bool operator==(const Category& other) const { return code == other.code && name == other.name; }
};

struct GicsLabels {
  Category sector;
  Category industry_group;
  Category industry;
  Category sub_industry;

  const Category& at(GicsLevel level) const;
  bool operator==(const GicsLabels&) const = default;
};

/// Parent links loaded from the hierarchy CSV; one row per sub-industry.
class GicsHierarchy {
public:
  /// Adds a leaf row. Throws DataError if any code already has a different parent.
  void add_row(const std::string& sector, const std::string& group, const std::string& industry,
               const std::string& sub_industry);

  bool has(GicsLevel level, const std::string& code) const;
  /// Parent code of `code` at `level` (level must not be Sector).
  const std::string& parent(GicsLevel level, const std::string& code) const;
  std::size_t size(GicsLevel level) const;

  /// Throws DataError when labels are unknown or inconsistent with the table.
  void check(const GicsLabels& labels) const;

  bool operator==(const GicsHierarchy&) const = default;

  struct Row {
    std::string sector, industry_group, industry, sub_industry;
    bool operator==(const Row&) const = default;
  };
  const std::vector<Row>& rows() const { return rows_; }

private:
  std::vector<Row> rows_;
  std::map<std::string, std::string> group_parent_;     // group -> sector
  std::map<std::string, std::string> industry_parent_;  // industry -> group
  std::map<std::string, std::string> sub_parent_;       // sub-industry -> industry
  std::map<std::string, int> sectors_;
};

GicsHierarchy load_hierarchy(const std::string& path);
void save_hierarchy(const GicsHierarchy& hierarchy, const std::string& path);

struct CompanyRecord {
  std::string company_id;
  std::string name;
  GicsLabels gics;
  std::string description;
  std::optional<std::string> raw_filing_path;

  bool operator==(const CompanyRecord&) const = default;
};

struct CorpusOptions {
  /// Descriptions shorter than this after cleaning are rejected.
  std::size_t min_description_chars = 1;
  int fiscal_year = 0;
  /// Used when a record has no description but names a raw filing.
  std::size_t min_item1_chars = 200;
};

class Corpus {
public:
  Corpus() = default;
  /// Validates ids, labels and descriptions, then sorts by company_id.
  Corpus(std::vector<CompanyRecord> records, GicsHierarchy hierarchy, int fiscal_year = 0,
         std::size_t min_description_chars = 1);

  const std::vector<CompanyRecord>& records() const { return records_; }
  const GicsHierarchy& hierarchy() const { return hierarchy_; }
  int fiscal_year() const { return fiscal_year_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const CompanyRecord* find(std::string_view company_id) const;
  std::vector<std::string> ids() const;
  /// company_id -> category code at `level`, in id order.
  std::map<std::string, std::string> labels(GicsLevel level) const;

  bool operator==(const Corpus&) const = default;

private:
  std::vector<CompanyRecord> records_;
  GicsHierarchy hierarchy_;
  int fiscal_year_ = 0;
};

/// Reads the JSONL corpus. Errors name the 1-based line number.
Corpus load_corpus(const std::string& path, const std::string& hierarchy_path,
                   const CorpusOptions& options = {});
/// Writes the corpus JSONL (hierarchy is saved separately).
void save_corpus(const Corpus& corpus, const std::string& path);

struct Item1Options {
  std::size_t min_chars = 200;
};

/// Returns the Business section of a plain-text 10-K: the span after the
/// last "Item 1. Business" heading up to the next Item 1A/1B/2 heading (or
/// end of text), with surrounding whitespace trimmed. Headings at the start
/// of a line are preferred; inline headings are used only when no line-start
/// heading exists. Throws DataError when no heading is found or the span is
/// shorter than `min_chars`.
std::string extract_item1(std::string_view raw_filing_text, const Item1Options& options = {});

struct SplitResult {
  std::vector<std::string> train;
  std::vector<std::string> test;
  /// Classes with a single member; their member is kept in train.
  std::vector<std::string> singleton_classes;
};

/// Per-class test count round(n_c * test_fraction) clamped to [1, n_c - 1].
SplitResult stratified_split(const std::map<std::string, std::string>& labels,
                             double test_fraction, std::uint64_t seed);
SplitResult stratified_split(const Corpus& corpus, GicsLevel level, double test_fraction,
                             std::uint64_t seed);

struct PairExample {
  std::string id_a;
  std::string id_b;
  int label = 0;  // 1 = same GICS industry

  bool operator==(const PairExample&) const = default;
};

struct PairDataset {
  std::vector<PairExample> pairs;
  /// Companies alone in their industry (no positive pair emitted).
  std::vector<std::string> warnings;
};

/// One positive (same industry) and one negative (other industry) pair per
/// company, in company_id order.
PairDataset generate_finetune_pairs(const Corpus& corpus, std::uint64_t seed);
void save_pairs(const std::vector<PairExample>& pairs, const std::string& path);

} // namespace compsim
