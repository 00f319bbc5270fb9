#include "compsim/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "compsim/csv.hpp"
#include "compsim/error.hpp"
#include "compsim/random.hpp"
#include "compsim/textprep.hpp"

namespace compsim {

using nlohmann::json;

std::string_view to_string(GicsLevel level) {
  switch (level) {
    case GicsLevel::Sector: return "sector";
    case GicsLevel::IndustryGroup: return "industry_group";
    case GicsLevel::Industry: return "industry";
    case GicsLevel::SubIndustry: return "sub_industry";
  }
  return "?";
}

GicsLevel parse_gics_level(std::string_view text) {
  if (text == "sector") return GicsLevel::Sector;
  if (text == "industry_group") return GicsLevel::IndustryGroup;
  if (text == "industry") return GicsLevel::Industry;
  if (text == "sub_industry") return GicsLevel::SubIndustry;
  throw ArgumentError("unknown GICS level '" + std::string(text) + "'");
}

const Category& GicsLabels::at(GicsLevel level) const {
  switch (level) {
    case GicsLevel::Sector: return sector;
    case GicsLevel::IndustryGroup: return industry_group;
    case GicsLevel::Industry: return industry;
    case GicsLevel::SubIndustry: break;
  }
  return sub_industry;
}

// ---------------------------------------------------------------------------
// Hierarchy

namespace {

void link(std::map<std::string, std::string>& parents, const std::string& child,
          const std::string& parent, std::string_view what) {
  auto [it, inserted] = parents.emplace(child, parent);
  if (!inserted && it->second != parent) {
    throw DataError(std::string(what) + " '" + child + "' maps to both '" + it->second +
                    "' and '" + parent + "'");
  }
}

} // namespace

void GicsHierarchy::add_row(const std::string& sector, const std::string& group,
                            const std::string& industry, const std::string& sub_industry) {
  if (sector.empty() || group.empty() || industry.empty() || sub_industry.empty()) {
    throw DataError("hierarchy row has an empty level");
  }
  link(group_parent_, group, sector, "industry group");
  link(industry_parent_, industry, group, "industry");
  link(sub_parent_, sub_industry, industry, "sub-industry");
  sectors_.emplace(sector, 0);
  rows_.push_back({sector, group, industry, sub_industry});
}

bool GicsHierarchy::has(GicsLevel level, const std::string& code) const {
  switch (level) {
    case GicsLevel::Sector: return sectors_.contains(code);
    case GicsLevel::IndustryGroup: return group_parent_.contains(code);
    case GicsLevel::Industry: return industry_parent_.contains(code);
    case GicsLevel::SubIndustry: return sub_parent_.contains(code);
  }
  return false;
}

const std::string& GicsHierarchy::parent(GicsLevel level, const std::string& code) const {
  const std::map<std::string, std::string>* table = nullptr;
  switch (level) {
    case GicsLevel::Sector: throw ArgumentError("sectors have no parent");
    case GicsLevel::IndustryGroup: table = &group_parent_; break;
    case GicsLevel::Industry: table = &industry_parent_; break;
    case GicsLevel::SubIndustry: table = &sub_parent_; break;
  }
  auto it = table->find(code);
  if (it == table->end()) {
    throw DataError("unknown " + std::string(to_string(level)) + " code '" + code + "'");
  }
  return it->second;
}

std::size_t GicsHierarchy::size(GicsLevel level) const {
  switch (level) {
    case GicsLevel::Sector: return sectors_.size();
    case GicsLevel::IndustryGroup: return group_parent_.size();
    case GicsLevel::Industry: return industry_parent_.size();
    case GicsLevel::SubIndustry: return sub_parent_.size();
  }
  return 0;
}

void GicsHierarchy::check(const GicsLabels& labels) const {
  for (auto level : {GicsLevel::Sector, GicsLevel::IndustryGroup, GicsLevel::Industry,
                     GicsLevel::SubIndustry}) {
    const auto& code = labels.at(level).code;
    if (code.empty()) throw DataError("empty GICS " + std::string(to_string(level)));
    if (!has(level, code)) {
      throw DataError("unknown GICS " + std::string(to_string(level)) + " code '" + code + "'");
    }
  }
  if (parent(GicsLevel::SubIndustry, labels.sub_industry.code) != labels.industry.code) {
    throw DataError("sub-industry '" + labels.sub_industry.code + "' does not belong to industry '" +
                    labels.industry.code + "'");
  }
  if (parent(GicsLevel::Industry, labels.industry.code) != labels.industry_group.code) {
    throw DataError("industry '" + labels.industry.code + "' does not belong to industry group '" +
                    labels.industry_group.code + "'");
  }
  if (parent(GicsLevel::IndustryGroup, labels.industry_group.code) != labels.sector.code) {
    throw DataError("industry group '" + labels.industry_group.code +
                    "' does not belong to sector '" + labels.sector.code + "'");
  }
}

GicsHierarchy load_hierarchy(const std::string& path) {
  const auto table = csv::read_file(path, {"sector", "industry_group", "industry", "sub_industry"});
  GicsHierarchy h;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    try {
      h.add_row(r[0], r[1], r[2], r[3]);
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(table.line_numbers[i]) + ": " + e.what());
    }
  }
  if (h.rows().empty()) throw DataError(path + ": hierarchy has no rows");
  return h;
}

void save_hierarchy(const GicsHierarchy& hierarchy, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  csv::write_row(out, {"sector", "industry_group", "industry", "sub_industry"});
  for (const auto& r : hierarchy.rows()) {
    csv::write_row(out, {r.sector, r.industry_group, r.industry, r.sub_industry});
  }
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<CompanyRecord> records, GicsHierarchy hierarchy, int fiscal_year,
               std::size_t min_description_chars)
    : records_(std::move(records)), hierarchy_(std::move(hierarchy)), fiscal_year_(fiscal_year) {
  std::stable_sort(records_.begin(), records_.end(),
                   [](const auto& a, const auto& b) { return a.company_id < b.company_id; });
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.company_id.empty()) throw DataError("empty company_id");
    if (i > 0 && records_[i - 1].company_id == r.company_id) {
      throw DataError("duplicate company_id '" + r.company_id + "'");
    }
    try {
      hierarchy_.check(r.gics);
    } catch (const DataError& e) {
      throw DataError("company '" + r.company_id + "': " + e.what());
    }
    if (clean_text(r.description).size() < std::max<std::size_t>(1, min_description_chars)) {
      throw DataError("company '" + r.company_id + "': description empty or too short after cleaning");
    }
  }
}

const CompanyRecord* Corpus::find(std::string_view company_id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), company_id,
                             [](const CompanyRecord& r, std::string_view id) { return r.company_id < id; });
  if (it == records_.end() || it->company_id != company_id) return nullptr;
  return &*it;
}

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.company_id);
  return out;
}

std::map<std::string, std::string> Corpus::labels(GicsLevel level) const {
  std::map<std::string, std::string> out;
  for (const auto& r : records_) out.emplace(r.company_id, r.gics.at(level).code);
  return out;
}

namespace {

Category parse_category(const json& j, std::string_view field) {
  if (j.is_string()) return {j.get<std::string>(), {}};
  if (j.is_number_integer()) return {std::to_string(j.get<long long>()), {}};
  if (j.is_object()) {
    Category c;
    if (!j.contains("code")) throw DataError("gics." + std::string(field) + " object lacks 'code'");
    const auto& code = j.at("code");
    c.code = code.is_string() ? code.get<std::string>() : std::to_string(code.get<long long>());
    if (j.contains("name")) c.name = j.at("name").get<std::string>();
    return c;
  }
  throw DataError("gics." + std::string(field) + " must be a string or {code, name}");
}

json category_json(const Category& c) {
  if (c.name.empty()) return c.code;
  return json{{"code", c.code}, {"name", c.name}};
}

std::string read_whole_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

Corpus load_corpus(const std::string& path, const std::string& hierarchy_path,
                   const CorpusOptions& options) {
  auto hierarchy = load_hierarchy(hierarchy_path);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path);
  const auto base_dir = std::filesystem::path(path).parent_path();

  std::vector<CompanyRecord> records;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path + ":" + std::to_string(line_no) + ": ";
    try {
      const auto j = json::parse(line);
      if (!j.is_object()) throw DataError("record is not a JSON object");
      CompanyRecord r;
      r.company_id = j.at("company_id").get<std::string>();
      r.name = j.value("name", std::string{});
      const auto& g = j.at("gics");
      r.gics.sector = parse_category(g.at("sector"), "sector");
      r.gics.industry_group = parse_category(g.at("industry_group"), "industry_group");
      r.gics.industry = parse_category(g.at("industry"), "industry");
      r.gics.sub_industry = parse_category(g.at("sub_industry"), "sub_industry");
      r.description = j.value("description", std::string{});
      if (j.contains("raw_filing_path") && !j.at("raw_filing_path").is_null()) {
        r.raw_filing_path = j.at("raw_filing_path").get<std::string>();
      }
      if (r.description.empty() && r.raw_filing_path) {
        const auto raw = read_whole_file(base_dir / *r.raw_filing_path);
        r.description = extract_item1(raw, {options.min_item1_chars});
      }
      if (r.company_id.empty()) throw DataError("empty company_id");
      auto [it, inserted] = first_line.emplace(r.company_id, line_no);
      if (!inserted) {
        throw DataError("duplicate company_id '" + r.company_id + "' (first seen on line " +
                        std::to_string(it->second) + ")");
      }
      hierarchy.check(r.gics);
      if (clean_text(r.description).size() < std::max<std::size_t>(1, options.min_description_chars)) {
        throw DataError("description of '" + r.company_id + "' is empty or too short after cleaning");
      }
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(where + "malformed record: " + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  return Corpus(std::move(records), std::move(hierarchy), options.fiscal_year,
                options.min_description_chars);
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& r : corpus.records()) {
    json j;
    j["company_id"] = r.company_id;
    j["name"] = r.name;
    j["gics"] = {{"sector", category_json(r.gics.sector)},
                 {"industry_group", category_json(r.gics.industry_group)},
                 {"industry", category_json(r.gics.industry)},
                 {"sub_industry", category_json(r.gics.sub_industry)}};
    j["description"] = r.description;
    if (r.raw_filing_path) j["raw_filing_path"] = *r.raw_filing_path;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Item 1 extraction

namespace {

enum class HeadingKind { Item1, Item1A, Item1B, Item2 };

struct Heading {
  HeadingKind kind;
  std::size_t begin;
  std::size_t end;
  bool line_start;
};

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
bool is_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_heading_sep(char c) {
  return c == ' ' || c == '\t' || c == '.' || c == ':' || c == '-' || c == '\n' || c == '\r';
}

bool match_icase(std::string_view text, std::size_t pos, std::string_view word) {
  if (text.size() - pos < word.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (lower(text[pos + i]) != word[i]) return false;
  }
  return true;
}

bool at_line_start(std::string_view text, std::size_t pos) {
  while (pos > 0) {
    const char c = text[pos - 1];
    if (c == '\n') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
    --pos;
  }
  return true;
}

std::vector<Heading> find_headings(std::string_view text) {
  std::vector<Heading> out;
  for (std::size_t p = 0; p + 4 <= text.size(); ++p) {
    if (!match_icase(text, p, "item")) continue;
    if (p > 0 && is_alnum(text[p - 1])) continue;
    std::size_t q = p + 4;
    while (q < text.size() && is_heading_sep(text[q]) && text[q] != '\n') ++q;
    if (q >= text.size()) break;
    auto followed_by_alnum = [&](std::size_t i) { return i < text.size() && is_alnum(text[i]); };
    if (text[q] == '2' && !followed_by_alnum(q + 1)) {
      out.push_back({HeadingKind::Item2, p, q + 1, at_line_start(text, p)});
      continue;
    }
    if (text[q] != '1') continue;
    const char next = q + 1 < text.size() ? lower(text[q + 1]) : '\0';
    if ((next == 'a' || next == 'b') && !followed_by_alnum(q + 2)) {
      out.push_back({next == 'a' ? HeadingKind::Item1A : HeadingKind::Item1B, p, q + 2,
                     at_line_start(text, p)});
      continue;
    }
    if (followed_by_alnum(q + 1)) continue;
    std::size_t r = q + 1;
    while (r < text.size() && is_heading_sep(text[r])) ++r;
    if (!match_icase(text, r, "business")) continue;
    r += 8;
    if (r < text.size() && (text[r] == '.' || text[r] == ':')) ++r;
    out.push_back({HeadingKind::Item1, p, r, at_line_start(text, p)});
  }
  return out;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

} // namespace

std::string extract_item1(std::string_view raw, const Item1Options& options) {
  const auto headings = find_headings(raw);
  const bool anchored = std::any_of(headings.begin(), headings.end(), [](const Heading& h) {
    return h.kind == HeadingKind::Item1 && h.line_start;
  });
  auto usable = [&](const Heading& h) { return !anchored || h.line_start; };

  const Heading* start = nullptr;
  for (const auto& h : headings) {
    if (h.kind == HeadingKind::Item1 && usable(h)) start = &h;
  }
  if (start == nullptr) throw DataError("Item 1 not found");

  std::size_t stop = raw.size();
  for (const auto& h : headings) {
    if (h.begin >= start->end && h.kind != HeadingKind::Item1 && usable(h)) {
      stop = h.begin;
      break;
    }
  }
  std::size_t lo = start->end;
  std::size_t hi = stop;
  while (lo < hi && is_space(raw[lo])) ++lo;
  while (hi > lo && is_space(raw[hi - 1])) --hi;
  if (hi == lo) throw DataError("Item 1 section is empty");
  if (hi - lo < options.min_chars) {
    throw DataError("Item 1 section too short (" + std::to_string(hi - lo) + " < " +
                    std::to_string(options.min_chars) + " characters)");
  }
  return std::string(raw.substr(lo, hi - lo));
}

// ---------------------------------------------------------------------------
// Splits and pairs

SplitResult stratified_split(const std::map<std::string, std::string>& labels,
                             double test_fraction, std::uint64_t seed) {
  if (labels.empty()) throw ArgumentError("stratified_split: empty corpus");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("stratified_split: test_fraction must be in (0, 1)");
  }
  std::map<std::string, std::vector<std::string>> by_class;
  for (const auto& [id, label] : labels) by_class[label].push_back(id);

  Rng rng(seed);
  SplitResult out;
  for (auto& [label, ids] : by_class) {
    const auto n = ids.size();
    if (n < 2) {
      out.singleton_classes.push_back(label);
      out.train.insert(out.train.end(), ids.begin(), ids.end());
      continue;
    }
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    shuffle(std::span<std::string>(ids), rng);
    out.test.insert(out.test.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), ids.begin() + static_cast<std::ptrdiff_t>(n_test), ids.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

SplitResult stratified_split(const Corpus& corpus, GicsLevel level, double test_fraction,
                             std::uint64_t seed) {
  return stratified_split(corpus.labels(level), test_fraction, seed);
}

PairDataset generate_finetune_pairs(const Corpus& corpus, std::uint64_t seed) {
  if (corpus.empty()) throw ArgumentError("generate_finetune_pairs: empty corpus");
  // ids grouped into contiguous industry blocks
  std::vector<const CompanyRecord*> grouped;
  for (const auto& r : corpus.records()) grouped.push_back(&r);
  std::stable_sort(grouped.begin(), grouped.end(), [](const auto* a, const auto* b) {
    return a->gics.industry.code < b->gics.industry.code;
  });
  std::map<std::string, std::pair<std::size_t, std::size_t>> block;  // industry -> [lo, hi)
  for (std::size_t i = 0; i < grouped.size(); ++i) {
    auto& b = block.try_emplace(grouped[i]->gics.industry.code, i, i).first->second;
    b.second = i + 1;
  }
  if (block.size() < 2) {
    throw ArgumentError("generate_finetune_pairs: corpus has a single industry; no negative pairs");
  }

  Rng rng(seed);
  PairDataset out;
  const auto n = grouped.size();
  for (const auto& r : corpus.records()) {
    const auto [lo, hi] = block.at(r.gics.industry.code);
    const auto members = hi - lo;
    if (members >= 2) {
      // uniform over the other members of the block
      auto pick = lo + uniform_index(rng, members - 1);
      if (grouped[pick] == &r) pick = hi - 1;
      out.pairs.push_back({r.company_id, grouped[pick]->company_id, 1});
    } else {
      out.warnings.push_back(r.company_id);
    }
    auto pick = uniform_index(rng, n - members);
    if (pick >= lo) pick += members;
    out.pairs.push_back({r.company_id, grouped[pick]->company_id, 0});
  }
  return out;
}

void save_pairs(const std::vector<PairExample>& pairs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  csv::write_row(out, {"id_a", "id_b", "label"});
  for (const auto& p : pairs) csv::write_row(out, {p.id_a, p.id_b, std::to_string(p.label)});
}

} // namespace compsim
