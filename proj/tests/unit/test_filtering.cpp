#include <gtest/gtest.h>

#include "longscribe/error.hpp"
#include "longscribe/filtering.hpp"
#include "longscribe/mock_backends.hpp"

using namespace longscribe;

namespace {
const AudioBuffer kSilence(std::vector<float>(16000 * 3, 0.0f), 16000);
const std::vector<Chunk> kChunks{{0.0, 1.0, {0}}, {1.0, 2.0, {1}}, {2.0, 3.0, {2}}};
const std::set<std::string> kSpeech{"Speech"};
}  // namespace

TEST(ClassifyChunk, ScriptedScoresPassThrough) {
  mock::ScriptedSegmentClassifier backend({{{"Speech", 0.9}}});
  const auto scores = classify_chunk(kSilence, kChunks[0], backend, 0);
  EXPECT_EQ(scores.scores, (LabelScores{{"Speech", 0.9}}));
}

TEST(ClassifyChunk, MultiLabelMapUnchanged) {
  const LabelScores multi{{"Speech", 0.4}, {"Music", 0.7}, {"Narration, monologue", 0.2}};
  mock::ScriptedSegmentClassifier backend({multi});
  const auto scores = classify_chunk(kSilence, kChunks[0], backend, 0);
  EXPECT_EQ(scores.scores, multi);
  EXPECT_DOUBLE_EQ(scores.max_over(default_speech_labels()), 0.4);
  EXPECT_DOUBLE_EQ(scores.score("Laughter"), 0.0);
}

TEST(ClassifyChunk, SilenceThroughEnergyMockScoresLow) {
  mock::EnergySegmentClassifier backend;
  EXPECT_LT(classify_chunk(kSilence, kChunks[1], backend).score("Speech"), 0.1);
}

TEST(ClassifyChunk, InvalidScoresAreRejected) {
  mock::ScriptedSegmentClassifier out_of_range({{{"Speech", 1.5}}});
  EXPECT_THROW(classify_chunk(kSilence, kChunks[0], out_of_range), Error);
  mock::ScriptedSegmentClassifier empty({LabelScores{}});
  EXPECT_THROW(classify_chunk(kSilence, kChunks[0], empty), Error);
}

TEST(FilterChunks, ThresholdZeroKeepsAll) {
  mock::ScriptedSegmentClassifier backend({{{"Music", 1.0}}, {{"Music", 1.0}}, {{"Music", 1.0}}});
  const auto r = filter_chunks(kChunks, kSilence, backend, kSpeech, 0.0);
  EXPECT_EQ(r.kept.size(), 3u);
  EXPECT_TRUE(r.rejected.empty());
}

TEST(FilterChunks, ThresholdOneRejectsPointNine) {
  mock::ScriptedSegmentClassifier backend({}, {{"Speech", 0.9}});
  const auto r = filter_chunks(kChunks, kSilence, backend, kSpeech, 1.0);
  EXPECT_TRUE(r.kept.empty());
  EXPECT_EQ(r.rejected.size(), 3u);
}

TEST(FilterChunks, MixedScoresKeepSecondAndThird) {
  mock::ScriptedSegmentClassifier backend({{{"Speech", 0.2}}, {{"Speech", 0.8}}, {{"Speech", 0.5}}});
  const auto r = filter_chunks(kChunks, kSilence, backend, kSpeech, 0.5);
  ASSERT_EQ(r.kept.size(), 2u);
  EXPECT_DOUBLE_EQ(r.kept[0].start_s, 1.0);
  EXPECT_DOUBLE_EQ(r.kept[1].start_s, 2.0);
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_DOUBLE_EQ(r.rejected[0].start_s, 0.0);
  EXPECT_EQ(r.speech_scores, (std::vector<double>{0.2, 0.8, 0.5}));
}

TEST(FilterChunks, EmptyLabelSetIsAnError) {
  mock::ScriptedSegmentClassifier backend({});
  EXPECT_THROW(filter_chunks(kChunks, kSilence, backend, {}, 0.5), Error);
  EXPECT_THROW(filter_chunks(kChunks, kSilence, backend, kSpeech, 1.5), Error);
}
