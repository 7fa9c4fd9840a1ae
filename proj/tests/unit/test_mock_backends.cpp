#include <gtest/gtest.h>

#include <cmath>

#include "longscribe/error.hpp"
#include "longscribe/mock_backends.hpp"
#include "test_util.hpp"

using namespace longscribe;
using namespace longscribe::mock;

namespace {

const char* kScript = R"({"entries": [
  {"start_s": 0.5, "end_s": 2.0,
   "tokens": [{"text": " hello", "logprob": -0.1, "start_s": 0.5, "end_s": 1.0},
              {"hex": "20d0bc", "logprob": -0.2}],
   "additional_tokens": [{"text": " hullo", "logprob": -0.3}]},
  {"start_s": 3.0, "end_s": 4.0,
   "tokens": [{"text": "<|eot|>", "logprob": 0, "special": true}],
   "stretched_tokens": [{"text": " stretched", "logprob": -1.0, "start_s": 3.0, "end_s": 4.0}]}
]})";

}  // namespace

TEST(Script, ParsesTextHexAndVariants) {
  const auto s = parse_recognition_script(kScript);
  ASSERT_EQ(s.entries.size(), 2u);
  EXPECT_EQ(s.entries[0].tokens[1].bytes, "\x20\xd0\xbc");
  EXPECT_EQ(s.entries[0].tokens[0].start_s, 0.5);
  EXPECT_FALSE(s.entries[0].tokens[1].start_s);
  ASSERT_TRUE(s.entries[0].additional_tokens);
  EXPECT_FALSE(s.entries[0].stretched_tokens);
  EXPECT_TRUE(s.entries[1].tokens[0].special);
}

TEST(Script, JsonRoundTrip) {
  const auto s = parse_recognition_script(kScript);
  const auto again = parse_recognition_script(to_json(s));
  ASSERT_EQ(again.entries.size(), s.entries.size());
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    ASSERT_EQ(again.entries[i].tokens.size(), s.entries[i].tokens.size());
    for (std::size_t k = 0; k < s.entries[i].tokens.size(); ++k) {
      EXPECT_EQ(again.entries[i].tokens[k].bytes, s.entries[i].tokens[k].bytes);
      EXPECT_EQ(again.entries[i].tokens[k].logprob, s.entries[i].tokens[k].logprob);
      EXPECT_EQ(again.entries[i].tokens[k].special, s.entries[i].tokens[k].special);
    }
  }
}

TEST(Script, RejectsMalformedInput) {
  EXPECT_THROW(parse_recognition_script("{"), Error);
  EXPECT_THROW(parse_recognition_script(R"({"entries":[{"start_s":1,"end_s":0,"tokens":[]}]})"), Error);
  EXPECT_THROW(parse_recognition_script(R"({"entries":[{"start_s":0,"end_s":1,"tokens":[{"hex":"abc","logprob":0}]}]})"), Error);
  EXPECT_THROW(parse_recognition_script(R"({"entries":[{"start_s":0,"end_s":1,"tokens":[{"logprob":0}]}]})"), Error);
  try {
    load_recognition_script("/nonexistent/script.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FileNotFound);
  }
}

TEST(ScriptedRecognizer, SelectsByMidpointAndRole) {
  ScriptedRecognizer base(parse_recognition_script(kScript));
  ScriptedRecognizer additional(parse_recognition_script(kScript), ScriptRole::Additional);
  const AudioBuffer none(std::vector<float>(16), 16000);

  const auto first = base.recognize(none, {0, 0.0, 2.0, 1.0});
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first[0].bytes, " hello");
  EXPECT_EQ(additional.recognize(none, {0, 0.0, 2.0, 1.0})[0].bytes, " hullo");
  // Entry 2 has no additional variant: the base tokens are reused.
  EXPECT_EQ(additional.recognize(none, {1, 2.0, 5.0, 1.0})[0].bytes, "<|eot|>");

  // Chunk-relative times on a chunk that starts at 0.25 s.
  const auto shifted = base.recognize(none, {0, 0.25, 2.0, 1.0});
  EXPECT_DOUBLE_EQ(*shifted[0].start_s, 0.25);

  // Stretched axis: original [2, 5) maps to [8/3, 20/3) at scale 4/3.
  const double scale = 4.0 / 3.0;
  const auto stretched = base.recognize(none, {1, 2.0 * scale, 5.0 * scale, scale});
  ASSERT_EQ(stretched.size(), 1u);
  EXPECT_EQ(stretched[0].bytes, " stretched");
  EXPECT_NEAR(*stretched[0].start_s, 3.0 * scale - 2.0 * scale, 1e-12);

  EXPECT_TRUE(base.recognize(none, {2, 5.0, 9.0, 1.0}).empty());
}

TEST(Energy, SilenceAndLoudFrames) {
  EXPECT_EQ(energy_speech_prob(std::vector<float>(320, 0.0f)), 0.0);
  EXPECT_GT(energy_speech_prob(std::vector<float>(320, 0.5f)), 0.99);

  EnergyFrameClassifier frames;
  std::vector<float> x(16000, 0.0f);
  for (std::size_t i = 8000; i < x.size(); ++i) x[i] = 0.3f * std::sin(0.1 * i);
  const auto probs = frames.classify_frames(AudioBuffer(x, 16000));
  ASSERT_EQ(probs.size(), 50u);
  EXPECT_LT(probs[10], 0.1);
  EXPECT_GT(probs[40], 0.9);
}

TEST(Energy, SegmentScoresSumToOne) {
  EnergySegmentClassifier seg;
  const auto scores = seg.classify_segment(AudioBuffer(std::vector<float>(1600, 0.2f), 16000), {});
  EXPECT_NEAR(scores.at("Speech") + scores.at("Silence"), 1.0, 1e-12);
  EXPECT_GT(scores.at("Speech"), 0.9);
}

TEST(Unigram, AddOneSmoothing) {
  UnigramScorer lm({{"a", 3.0}, {"B", 1.0}});
  // total 4, vocabulary 2, one unseen slot -> denominator 7.
  EXPECT_DOUBLE_EQ(lm.log_prob("a"), std::log(4.0 / 7.0));
  EXPECT_DOUBLE_EQ(lm.log_prob("b"), std::log(2.0 / 7.0));
  EXPECT_DOUBLE_EQ(lm.log_prob("zzz"), std::log(1.0 / 7.0));
  const std::vector<std::string> words{"A", "zzz"};
  EXPECT_DOUBLE_EQ(lm.score(words), std::log(4.0 / 7.0) + std::log(1.0 / 7.0));
}

TEST(Unigram, LoadsTableAndRejectsBadLines) {
  testutil::TempDir dir;
  testutil::write_text(dir.path() / "ok.tsv", "# comment\nhello\t3\n\nworld\t1\n");
  auto lm = load_unigram_scorer(dir.path() / "ok.tsv");
  EXPECT_DOUBLE_EQ(lm.log_prob("hello"), std::log(4.0 / 7.0));
  testutil::write_text(dir.path() / "bad.tsv", "hello 3\n");
  EXPECT_THROW(load_unigram_scorer(dir.path() / "bad.tsv"), Error);
  testutil::write_text(dir.path() / "bad2.tsv", "hello\tmany\n");
  EXPECT_THROW(load_unigram_scorer(dir.path() / "bad2.tsv"), Error);
}
