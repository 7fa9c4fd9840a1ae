#include <gtest/gtest.h>

#include <random>

#include "longscribe/error.hpp"
#include "longscribe/mock_backends.hpp"
#include "longscribe/recognition.hpp"
#include "longscribe/text.hpp"

using namespace longscribe;

namespace {

TokenPiece tok(std::string bytes, double lp = -0.1) { return {std::move(bytes), lp, {}, {}, false}; }

// Random text over a mixed alphabet including multi-byte code points and
// assorted whitespace.
std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> alphabet = {"a", "b", "Z", "é", "с", "е", "т", "ь", "€",
                                                     "😀", "7", ",", " ", " ", "\t", "\n", " "};
  std::string s;
  for (int i = 0, n = static_cast<int>(rng() % 40); i < n; ++i) s += alphabet[rng() % alphabet.size()];
  return s;
}

}  // namespace

TEST(WordScore, Examples) {
  const std::vector<double> one{-0.5};
  for (auto r : {ScoreReduction::Min, ScoreReduction::Sum, ScoreReduction::Mean}) {
    EXPECT_DOUBLE_EQ(word_score(one, r), -0.5);
  }
  const std::vector<double> two{-1.0, -2.0};
  EXPECT_DOUBLE_EQ(word_score(two, ScoreReduction::Min), -2.0);
  EXPECT_DOUBLE_EQ(word_score(two, ScoreReduction::Sum), -3.0);
  EXPECT_DOUBLE_EQ(word_score(two, ScoreReduction::Mean), -1.5);
  EXPECT_THROW(word_score(std::vector<double>{}, ScoreReduction::Min), Error);
  EXPECT_THROW(word_score(std::vector<double>{0.5}, ScoreReduction::Min), Error);
}

TEST(WordScore, RandomVectorsMatchNaiveLoop) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-10.0, 0.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> v(1 + rng() % 10);
    for (auto& x : v) x = u(rng);
    double mn = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      mn = i == 0 ? v[i] : (v[i] < mn ? v[i] : mn);
      sum += v[i];
    }
    EXPECT_DOUBLE_EQ(word_score(v, ScoreReduction::Min), mn);
    EXPECT_NEAR(word_score(v, ScoreReduction::Sum), sum, 1e-12);
    EXPECT_NEAR(word_score(v, ScoreReduction::Mean), sum / v.size(), 1e-12);
  }
}

TEST(Grouping, TwoTokenCyrillicWord) {
  const std::vector<TokenPiece> tokens{tok(" с", -0.4), tok("ети", -0.7)};
  const auto words = group_tokens_into_words(tokens, ScoreReduction::Sum);
  ASSERT_EQ(words.size(), 1u);
  EXPECT_EQ(words[0].text, "сети");
  EXPECT_EQ(words[0].tokens, (TokenRange{0, 2}));
  EXPECT_DOUBLE_EQ(words[0].score, -0.4 + -0.7);
}

TEST(Grouping, SingleToken) {
  const std::vector<TokenPiece> tokens{tok(" cat")};
  const auto words = group_tokens_into_words(tokens);
  ASSERT_EQ(words.size(), 1u);
  EXPECT_EQ(words[0].text, "cat");
  EXPECT_EQ(words[0].tokens, (TokenRange{0, 1}));
}

TEST(Grouping, CodePointSplitAcrossTokens) {
  // "с" is D1 81; split between its two bytes.
  const std::vector<TokenPiece> tokens{tok(" \xD1", -0.1), tok("\x81" "ети", -0.2)};
  const auto words = group_tokens_into_words(tokens);
  ASSERT_EQ(words.size(), 1u);
  EXPECT_EQ(words[0].text, "сети");
  EXPECT_EQ(words[0].tokens, (TokenRange{0, 2}));
  EXPECT_DOUBLE_EQ(words[0].score, -0.2);
}

TEST(Grouping, HelloWorldMinScores) {
  const std::vector<TokenPiece> tokens{tok(" hello", -0.1), tok(" wor", -0.2), tok("ld", -0.3)};
  const auto words = group_tokens_into_words(tokens, ScoreReduction::Min);
  ASSERT_EQ(words.size(), 2u);
  EXPECT_EQ(words[0].text, "hello");
  EXPECT_DOUBLE_EQ(words[0].score, -0.1);
  EXPECT_EQ(words[1].text, "world");
  EXPECT_EQ(words[1].tokens, (TokenRange{1, 3}));
  EXPECT_DOUBLE_EQ(words[1].score, -0.3);
}

TEST(Grouping, SpecialTokensAreSkipped) {
  std::vector<TokenPiece> tokens{tok("<|en|>", -5.0), tok(" hi", -0.1), tok("<|0.00|>", -9.0)};
  tokens[0].special = tokens[2].special = true;
  const auto words = group_tokens_into_words(tokens);
  ASSERT_EQ(words.size(), 1u);
  EXPECT_EQ(words[0].text, "hi");
  EXPECT_EQ(words[0].tokens, (TokenRange{1, 2}));
  EXPECT_DOUBLE_EQ(words[0].score, -0.1);
}

TEST(Grouping, TokenContainingABoundaryIsShared) {
  const std::vector<TokenPiece> tokens{tok(" a", -0.1), tok("b c", -0.2), tok("d", -0.3)};
  const auto words = group_tokens_into_words(tokens);
  ASSERT_EQ(words.size(), 2u);
  EXPECT_EQ(words[0].text, "ab");
  EXPECT_EQ(words[0].tokens, (TokenRange{0, 2}));
  EXPECT_EQ(words[1].text, "cd");
  EXPECT_EQ(words[1].tokens, (TokenRange{1, 3}));
}

TEST(Grouping, WhitespaceTokensJoinFollowingWord) {
  const std::vector<TokenPiece> tokens{tok("a"), tok(" "), tok("b"), tok(" ")};
  const auto words = group_tokens_into_words(tokens);
  ASSERT_EQ(words.size(), 2u);
  EXPECT_EQ(words[0].tokens, (TokenRange{0, 1}));
  EXPECT_EQ(words[1].tokens, (TokenRange{1, 4}));
}

TEST(Grouping, InvalidUtf8IsAnError) {
  const std::vector<TokenPiece> tokens{tok(" \xD1")};
  EXPECT_THROW(group_tokens_into_words(tokens), Error);
}

TEST(Grouping, RandomByteSplitsRegroupLosslessly) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 2000; ++t) {
    const std::string text = random_text(rng);
    std::vector<TokenPiece> tokens;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t len = 1 + rng() % 5;
      tokens.push_back(tok(text.substr(pos, len), -static_cast<double>(rng() % 100) / 10.0));
      pos += len;
    }
    const auto words = group_tokens_into_words(tokens);
    const auto expected = split_words(text);
    ASSERT_EQ(words.size(), expected.size()) << text;
    for (std::size_t k = 0; k < words.size(); ++k) {
      ASSERT_EQ(words[k].text, expected[k]);
      std::string covered;
      for (std::size_t i = words[k].tokens.begin; i < words[k].tokens.end; ++i) covered += tokens[i].bytes;
      ASSERT_NE(covered.find(words[k].text), std::string::npos);
      if (k > 0) ASSERT_GE(words[k].tokens.begin + 1, words[k - 1].tokens.end);
    }
  }
}

TEST(Recognize, PassesThroughScriptAndConvertsTimes) {
  mock::RecognitionScript script;
  script.entries.push_back({10.5, 11.5, {{" hello", -0.1, 10.5, 11.0, false}, {" world", -0.2, 11.0, 11.5, false}}, {}, {}});
  mock::ScriptedRecognizer rec(script);
  const AudioBuffer audio(std::vector<float>(16000 * 20, 0.0f), 16000);
  const auto tr = recognize(audio, Chunk{10.0, 12.0, {}}, rec, ScoreReduction::Min, 3);
  ASSERT_EQ(tr.words.size(), 2u);
  EXPECT_EQ(tr.text(), "hello world");
  EXPECT_EQ(tr.chunk_id, 3u);
  EXPECT_NEAR(*tr.words[0].start_s, 10.5, 1e-9);
  EXPECT_NEAR(*tr.words[1].end_s, 11.5, 1e-9);
}

TEST(Recognize, EmptyTokenListGivesNoWords) {
  mock::ScriptedRecognizer rec(mock::RecognitionScript{});
  const AudioBuffer audio(std::vector<float>(16000, 0.0f), 16000);
  const auto tr = recognize(audio, Chunk{0.0, 1.0, {}}, rec);
  EXPECT_TRUE(tr.words.empty());
  EXPECT_TRUE(tr.tokens.empty());
}

TEST(Recognize, RussianExampleSumScore) {
  mock::RecognitionScript script;
  script.entries.push_back({0.2, 0.8, {tok(" с", -0.25), tok("ети", -0.5)}, {}, {}});
  mock::ScriptedRecognizer rec(script);
  const AudioBuffer audio(std::vector<float>(16000, 0.0f), 16000);
  const auto tr = recognize(audio, Chunk{0.0, 1.0, {}}, rec, ScoreReduction::Sum);
  ASSERT_EQ(tr.words.size(), 1u);
  EXPECT_EQ(tr.words[0].text, "сети");
  EXPECT_DOUBLE_EQ(tr.words[0].score, -0.75);
}

namespace {
class FixedRecognizer : public Recognizer {
 public:
  explicit FixedRecognizer(std::vector<TokenPiece> t) : tokens_(std::move(t)) {}
  std::string name() const override { return "fixed"; }
  std::vector<TokenPiece> recognize(const AudioBuffer&, const ChunkContext&) override { return tokens_; }
  std::vector<TokenPiece> tokens_;
};
}  // namespace

TEST(Recognize, MarkerTokensAreSpecialByDefault) {
  FixedRecognizer rec({tok("<|startoftranscript|>", -1.0), tok(" ok", -0.3)});
  const AudioBuffer audio(std::vector<float>(16000, 0.0f), 16000);
  const auto tr = recognize(audio, Chunk{0.0, 1.0, {}}, rec);
  ASSERT_EQ(tr.words.size(), 1u);
  EXPECT_TRUE(tr.tokens[0].special);
  EXPECT_DOUBLE_EQ(tr.words[0].score, -0.3);
}

TEST(Recognize, StretchedTimesMapBackToOriginalAxis) {
  FixedRecognizer rec({{" x", -0.1, 1.0, 2.0, false}});
  const AudioBuffer audio(std::vector<float>(16000 * 20, 0.0f), 16000);
  // Chunk [8, 12) on the stretched axis, scale 4/3.
  const auto tr = recognize(audio, Chunk{8.0, 12.0, {}}, rec, ScoreReduction::Min, 0, 4.0 / 3.0);
  EXPECT_NEAR(*tr.words[0].start_s, 9.0 * 0.75, 1e-9);
  EXPECT_NEAR(*tr.words[0].end_s, 10.0 * 0.75, 1e-9);
}

TEST(Recognize, MalformedBackendOutputIsProtocolError) {
  const AudioBuffer audio(std::vector<float>(16000, 0.0f), 16000);
  for (auto bad : {std::vector<TokenPiece>{tok(" a", 0.5)}, std::vector<TokenPiece>{tok("")},
                   std::vector<TokenPiece>{tok(" \xD1")}}) {
    FixedRecognizer rec(bad);
    try {
      recognize(audio, Chunk{0.0, 1.0, {}}, rec);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Protocol);
    }
  }
}

TEST(Concatenate, RebasesTokenRanges) {
  Transcription a, b;
  a.tokens = {tok(" one"), tok(" two")};
  a.words = group_tokens_into_words(a.tokens);
  b.tokens = {tok(" three")};
  b.words = group_tokens_into_words(b.tokens);
  const std::vector<Transcription> parts{a, b};
  const auto all = concatenate(parts);
  EXPECT_EQ(all.text(), "one two three");
  EXPECT_EQ(all.words[2].tokens, (TokenRange{2, 3}));
  EXPECT_FALSE(all.chunk_id.has_value());
}
