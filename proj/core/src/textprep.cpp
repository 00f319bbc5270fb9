#include "compsim/textprep.hpp"

#include <algorithm>
#include <cmath>

#include "compsim/error.hpp"

namespace compsim {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

bool is_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
         (c >= 123 && c <= 126);
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool starts_with_icase(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower(s[pos + i]) != prefix[i]) return false;
  }
  return true;
}

// Position where a URL begins inside `word`, or npos.
std::size_t url_start(std::string_view word) {
  for (std::size_t i = 0; i < word.size(); ++i) {
    for (std::string_view p : {std::string_view{"https://"}, std::string_view{"http://"},
                               std::string_view{"www."}}) {
      if (starts_with_icase(word, i, p) && word.size() > i + p.size()) return i;
    }
  }
  return std::string_view::npos;
}

} // namespace

void ChunkingConfig::validate() const {
  if (window < 1) throw ArgumentError("chunk window must be >= 1");
  if (context_budget < 1) throw ArgumentError("context budget must be >= 1");
  if (!(tokens_per_word > 0.0) || !std::isfinite(tokens_per_word)) {
    throw ArgumentError("tokens_per_word must be positive");
  }
}

std::size_t ChunkingConfig::word_budget() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                      static_cast<double>(context_budget) / tokens_per_word)));
}

std::size_t ChunkingConfig::word_window() const {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(window) / tokens_per_word)));
}

std::string clean_text(std::string_view raw) {
  std::string ascii;
  ascii.reserve(raw.size());
  for (char c : raw) {
    if (static_cast<unsigned char>(c) < 0x80) ascii += c;
  }

  std::string out;
  out.reserve(ascii.size());
  std::size_t i = 0;
  while (i < ascii.size()) {
    while (i < ascii.size() && is_space(static_cast<unsigned char>(ascii[i]))) ++i;
    std::size_t j = i;
    while (j < ascii.size() && !is_space(static_cast<unsigned char>(ascii[j]))) ++j;
    if (j > i) {
      std::string_view word(ascii.data() + i, j - i);
      word = word.substr(0, url_start(word));
      if (!word.empty()) {
        if (!out.empty()) out += ' ';
        for (char c : word) out += lower(c);
      }
    }
    i = j;
  }
  return out;
}

TokenSequence tokenize(std::string_view cleaned, std::string source_id) {
  TokenSequence seq;
  seq.source_id = std::move(source_id);
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && is_space(static_cast<unsigned char>(cleaned[i]))) ++i;
    std::size_t j = i;
    while (j < cleaned.size() && !is_space(static_cast<unsigned char>(cleaned[j]))) ++j;
    std::size_t lo = i;
    std::size_t hi = j;
    while (lo < hi && is_punct(static_cast<unsigned char>(cleaned[lo]))) {
      seq.tokens.emplace_back(1, cleaned[lo]);
      ++lo;
    }
    std::size_t trail = hi;
    while (trail > lo && is_punct(static_cast<unsigned char>(cleaned[trail - 1]))) --trail;
    if (trail > lo) {
      std::string core;
      core.reserve(trail - lo);
      for (std::size_t k = lo; k < trail; ++k) core += lower(cleaned[k]);
      seq.tokens.push_back(std::move(core));
    }
    for (std::size_t k = trail; k < hi; ++k) seq.tokens.emplace_back(1, cleaned[k]);
    i = j;
  }
  return seq;
}

TokenSequence truncate(const TokenSequence& tokens, std::size_t budget) {
  if (budget < 1) throw ArgumentError("truncation budget must be >= 1");
  TokenSequence out;
  out.source_id = tokens.source_id;
  const auto n = std::min(budget, tokens.size());
  out.tokens.assign(tokens.tokens.begin(), tokens.tokens.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

std::vector<TokenSequence> chunk(const TokenSequence& tokens, std::size_t window) {
  if (window < 1) throw ArgumentError("chunk window must be >= 1");
  std::vector<TokenSequence> chunks;
  for (std::size_t start = 0; start < tokens.size(); start += window) {
    const auto end = std::min(tokens.size(), start + window);
    TokenSequence c;
    c.source_id = tokens.source_id;
    c.tokens.assign(tokens.tokens.begin() + static_cast<std::ptrdiff_t>(start),
                    tokens.tokens.begin() + static_cast<std::ptrdiff_t>(end));
    chunks.push_back(std::move(c));
  }
  return chunks;
}

std::vector<TokenSequence> prepare_document(std::string_view raw, const ChunkingConfig& config,
                                            std::string source_id) {
  config.validate();
  const auto tokens = tokenize(clean_text(raw), std::move(source_id));
  return chunk(truncate(tokens, config.word_budget()), config.word_window());
}

std::string join_tokens(const TokenSequence& tokens) {
  std::string out;
  for (const auto& t : tokens.tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

} // namespace compsim
