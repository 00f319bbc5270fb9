#pragma once

// Text normalization, tokenization and context-window chunking.
//
// Cleaning rules (applied in this order, byte-oriented):
//   1. every byte >= 0x80 is dropped (non-ASCII removal, no transliteration);
//   2. within each whitespace-delimited word, the first occurrence of
//      "http://", "https://" or "www." (ASCII case-insensitive) that is
//      followed by at least one more byte starts a URL, which runs to the
//      end of the word and is removed;
//   3. surviving words are joined by single spaces, ends trimmed;
//   4. ASCII letters are lowercased.
// Whitespace is the ASCII set " \t\n\v\f\r".

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace compsim {

struct TokenSequence {
  std::vector<std::string> tokens;
  std::string source_id;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const TokenSequence&) const = default;
};

struct ChunkingConfig {
  std::size_t window = 512;          // tokens per chunk handed to a provider
  std::size_t context_budget = 512;  // leading tokens kept per document
  /// Model tokens produced per word on average. Budgets are expressed in
  /// model tokens, so the word budget is floor(budget / tokens_per_word).
  double tokens_per_word = 1.0;

  void validate() const;
  std::size_t word_budget() const;
  std::size_t word_window() const;
};

std::string clean_text(std::string_view raw);

/// Whitespace split, then leading/trailing ASCII punctuation peeled off
/// into single-character tokens. Letters are lowercased.
TokenSequence tokenize(std::string_view cleaned, std::string source_id = {});

TokenSequence truncate(const TokenSequence& tokens, std::size_t budget);

/// Consecutive non-overlapping chunks of `window` tokens; the last one may
/// be shorter. Empty input gives no chunks.
std::vector<TokenSequence> chunk(const TokenSequence& tokens, std::size_t window);

/// clean -> tokenize -> truncate -> chunk with the given config.
std::vector<TokenSequence> prepare_document(std::string_view raw, const ChunkingConfig& config,
                                            std::string source_id = {});

/// Tokens joined with single spaces (used when a provider takes text).
std::string join_tokens(const TokenSequence& tokens);

} // namespace compsim
