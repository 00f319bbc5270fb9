#include <gtest/gtest.h>

#include <cctype>
#include <numeric>
#include <sstream>

#include "compsim/random.hpp"
#include "compsim/textprep.hpp"

using namespace compsim;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> list) { return {list.begin(), list.end()}; }

TokenSequence numbered(std::size_t n) {
  TokenSequence t;
  for (std::size_t i = 0; i < n; ++i) t.tokens.push_back("t" + std::to_string(i));
  return t;
}

std::string random_text(Rng& rng, std::size_t len) {
  static const std::string alphabet = "abcXYZ .,;:!?'\"()\t\n  https://www.a/b\xc3\xa9\xe2\x82\xac-0123";
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += alphabet[uniform_index(rng, alphabet.size())];
  return s;
}

} // namespace

TEST(CleanText, RemovesUrls) { EXPECT_EQ(clean_text("Visit https://example.com NOW"), "visit now"); }

TEST(CleanText, RemovesWwwAndHttpPrefixes) {
  EXPECT_EQ(clean_text("see www.acme.com/about and http://x.org/y?z=1 today"), "see and today");
}

TEST(CleanText, DropsNonAsciiBytesAndCollapsesSpaces) { EXPECT_EQ(clean_text("na\xc3\xafve  caf\xc3\xa9"), "nave caf"); }

TEST(CleanText, TrimsAndLowercases) { EXPECT_EQ(clean_text("  \tHello\n\nWORLD  "), "hello world"); }

TEST(CleanText, EmptyInputGivesEmptyOutput) { EXPECT_EQ(clean_text(""), ""); }

TEST(CleanText, RandomizedIdempotentAndNeverLonger) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto raw = random_text(rng, uniform_index(rng, 80));
    const auto once = clean_text(raw);
    EXPECT_LE(once.size(), raw.size());
    EXPECT_EQ(clean_text(once), once);
    for (char c : once) {
      EXPECT_LT(static_cast<unsigned char>(c), 0x80);
      EXPECT_FALSE(std::isupper(static_cast<unsigned char>(c)));
    }
  }
}

TEST(Tokenize, SplitsTrailingPunctuation) {
  EXPECT_EQ(tokenize("amazon sells books.").tokens, toks({"amazon", "sells", "books", "."}));
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").tokens.empty()); }

TEST(Tokenize, LeadingAndTrailingPunctuationPeeled) {
  EXPECT_EQ(tokenize("(acme), inc.\"").tokens, toks({"(", "acme", ")", ",", "inc", ".", "\""}));
}

TEST(Tokenize, InnerPunctuationKept) { EXPECT_EQ(tokenize("e-commerce 3.5").tokens, toks({"e-commerce", "3.5"})); }

TEST(Tokenize, CarriesSourceId) { EXPECT_EQ(tokenize("a b", "AAA").source_id, "AAA"); }

TEST(Tokenize, TokensAreLowercaseWithoutWhitespace) {
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto t = tokenize(clean_text(random_text(rng, 60)));
    for (const auto& tok : t.tokens) {
      EXPECT_FALSE(tok.empty());
      for (char c : tok) {
        EXPECT_FALSE(std::isspace(static_cast<unsigned char>(c)));
        EXPECT_FALSE(std::isupper(static_cast<unsigned char>(c)));
      }
    }
  }
}

TEST(Tokenize, LongTextCountTracksWordsPlusEdgePunctuation) {
  // 1,600 words with sentence punctuation; compare with a count done by
  // splitting on whitespace and counting boundary punctuation characters.
  Rng rng(3);
  std::string text;
  const char* words[] = {"revenue", "growth", "customers", "(segment", "markets)", "products,", "services;", "u.s."};
  for (int i = 0; i < 1600; ++i) {
    if (i) text += ' ';
    text += words[uniform_index(rng, 8)];
    if (i % 17 == 16) text += '.';
  }
  std::istringstream in(text);
  std::string w;
  std::size_t expected = 0;
  while (in >> w) {
    std::size_t lo = 0, hi = w.size();
    while (lo < hi && std::ispunct(static_cast<unsigned char>(w[lo]))) ++lo, ++expected;
    while (hi > lo && std::ispunct(static_cast<unsigned char>(w[hi - 1]))) --hi, ++expected;
    if (hi > lo) ++expected;
  }
  const auto n = tokenize(clean_text(text)).size();
  EXPECT_NEAR(static_cast<double>(n), static_cast<double>(expected), 0.05 * static_cast<double>(expected));
  EXPECT_EQ(n, expected);
}

TEST(Truncate, KeepsPrefix) {
  const auto t = numbered(2000);
  const auto cut = truncate(t, 1536);
  ASSERT_EQ(cut.size(), 1536u);
  EXPECT_TRUE(std::equal(cut.tokens.begin(), cut.tokens.end(), t.tokens.begin()));
  EXPECT_EQ(truncate(numbered(300), 512).size(), 300u);
}

TEST(Truncate, Composes) {
  const auto t = numbered(2000);
  EXPECT_EQ(truncate(truncate(t, 1536), 512), truncate(t, 512));
}

TEST(Chunk, Lengths) {
  auto lengths = [](const std::vector<TokenSequence>& cs) {
    std::vector<std::size_t> out;
    for (const auto& c : cs) out.push_back(c.size());
    return out;
  };
  EXPECT_EQ(lengths(chunk(numbered(1000), 512)), (std::vector<std::size_t>{512, 488}));
  EXPECT_EQ(lengths(chunk(numbered(512), 512)), (std::vector<std::size_t>{512}));
  EXPECT_EQ(lengths(chunk(numbered(1536), 512)), (std::vector<std::size_t>{512, 512, 512}));
  EXPECT_TRUE(chunk(TokenSequence{}, 512).empty());
}

TEST(Chunk, RandomizedPartition) {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const auto n = uniform_index(rng, 3000);
    const auto window = 1 + uniform_index(rng, 700);
    const auto t = numbered(n);
    const auto chunks = chunk(t, window);
    std::vector<std::string> joined;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      if (c + 1 < chunks.size()) EXPECT_EQ(chunks[c].size(), window);
      joined.insert(joined.end(), chunks[c].tokens.begin(), chunks[c].tokens.end());
    }
    EXPECT_EQ(joined, t.tokens);
  }
}

TEST(ChunkingConfig, WordBudgetsFollowTokenRatio) {
  ChunkingConfig c;
  c.context_budget = 1536;
  c.window = 512;
  c.tokens_per_word = 1.3;
  EXPECT_EQ(c.word_budget(), 1181u);
  EXPECT_EQ(c.word_window(), 393u);
}

TEST(ChunkingConfig, RejectsZeroWindow) {
  ChunkingConfig c;
  c.window = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(PrepareDocument, CleansTruncatesAndChunks) {
  ChunkingConfig c;
  c.window = 2;
  c.context_budget = 5;
  const auto chunks = prepare_document("One TWO three, four https://x.io five six", c, "ID");
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].tokens, toks({"one", "two"}));
  EXPECT_EQ(chunks[1].tokens, toks({"three", ","}));
  EXPECT_EQ(chunks[2].tokens, toks({"four"}));
  EXPECT_EQ(chunks[2].source_id, "ID");
}
