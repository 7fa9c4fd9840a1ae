#include <gtest/gtest.h>

#include <random>

#include "longscribe/error.hpp"
#include "longscribe/mock_backends.hpp"
#include "longscribe/segmentation.hpp"
#include "oracles.hpp"

using namespace longscribe;

namespace {

using Pairs = std::vector<std::pair<double, double>>;

Pairs as_pairs(const std::vector<SpeechSegment>& segs) {
  Pairs out;
  for (const auto& s : segs) out.emplace_back(s.start_s, s.end_s);
  return out;
}

void expect_same(const Pairs& got, const Pairs& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got[i].first, want[i].first, 1e-9);
    EXPECT_NEAR(got[i].second, want[i].second, 1e-9);
  }
}

}  // namespace

TEST(Binarize, NoSpeech) {
  EXPECT_TRUE(binarize({std::vector<double>(50, 0.0), 0.02}, 0.5, 0.35).empty());
}

TEST(Binarize, FullSpan) {
  const auto segs = binarize({std::vector<double>(100, 1.0), 0.02}, 0.5, 0.35);
  expect_same(as_pairs(segs), {{0.0, 2.0}});
}

TEST(Binarize, EmptySeriesIsNotAnError) {
  EXPECT_TRUE(binarize({{}, 0.02}, 0.5, 0.35).empty());
}

TEST(Binarize, InvalidThresholds) {
  const FrameProbSeries s{{0.5}, 0.02};
  EXPECT_THROW(binarize(s, 0.3, 0.5), Error);
  EXPECT_THROW(binarize(s, 1.0, 0.5), Error);
  EXPECT_THROW(binarize(s, 0.5, 0.0), Error);
}

TEST(Binarize, HysteresisExampleMatchesSimulator) {
  const std::vector<double> probs{0.1, 0.9, 0.9, 0.3, 0.9, 0.1};
  const auto got = as_pairs(binarize({probs, 0.02}, 0.8, 0.5));
  const auto want = oracle::label_runs(oracle::hysteresis_labels(probs, 0.8, 0.5), 0.02);
  expect_same(got, want);
  // Frame 3 (0.3 < offset) closes the first segment; frame 4 reopens.
  expect_same(got, {{0.02, 0.06}, {0.08, 0.10}});
}

TEST(Binarize, RandomSeriesMatchSimulator) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> probs(1 + rng() % 200);
    for (auto& p : probs) p = u(rng);
    double onset = 0.05 + 0.9 * u(rng);
    double offset = 0.01 + (onset - 0.01) * u(rng);
    const auto got = as_pairs(binarize({probs, 0.02}, onset, offset));
    expect_same(got, oracle::label_runs(oracle::hysteresis_labels(probs, onset, offset), 0.02));
  }
}

TEST(Smooth, Examples) {
  EXPECT_TRUE(smooth({}, 0.25, 0.2).empty());
  const std::vector<SpeechSegment> segs{{0.0, 1.0}, {1.05, 2.0}};
  expect_same(as_pairs(smooth(segs, 0.0, 0.1)), {{0.0, 2.0}});
}

TEST(Smooth, GapFillHappensBeforeShortSegmentDrop) {
  // Two 0.1 s segments separated by 0.05 s: merged to 0.25 s, which survives min_on 0.25.
  const std::vector<SpeechSegment> segs{{1.0, 1.1}, {1.15, 1.25}};
  expect_same(as_pairs(smooth(segs, 0.25, 0.1)), {{1.0, 1.25}});
}

TEST(Smooth, RejectsBadInput) {
  const std::vector<SpeechSegment> neg{{1.0, 0.5}};
  EXPECT_THROW(smooth(neg, 0.1, 0.1), Error);
  const std::vector<SpeechSegment> ok{{0.0, 1.0}};
  EXPECT_THROW(smooth(ok, -0.1, 0.1), Error);
}

TEST(Smooth, RandomSetsMatchTwoPassReferenceAndAreIdempotent) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<SpeechSegment> segs;
    double cursor = u(rng);
    for (int k = 0, n = static_cast<int>(rng() % 12); k < n; ++k) {
      const double start = cursor + 0.5 * u(rng);
      const double end = start + 0.01 + u(rng);
      segs.push_back({start, end});
      cursor = end;
    }
    const double min_on = 0.6 * u(rng), min_off = 0.6 * u(rng);
    const auto got = smooth(segs, min_on, min_off);
    expect_same(as_pairs(got), oracle::two_pass_smooth(as_pairs(segs), min_on, min_off));
    expect_same(as_pairs(smooth(got, min_on, min_off)), as_pairs(got));
  }
}

TEST(CutAndMerge, ShortSegmentIsOneChunk) {
  const FrameProbSeries series{std::vector<double>(1000, 0.9), 0.02};
  const std::vector<SpeechSegment> segs{{2.0, 12.0}};
  const auto chunks = cut_and_merge(segs, series, 30.0);
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_DOUBLE_EQ(chunks[0].start_s, 2.0);
  EXPECT_DOUBLE_EQ(chunks[0].end_s, 12.0);
  EXPECT_EQ(chunks[0].source_segment_ids, std::vector<std::size_t>{0});
}

TEST(CutAndMerge, CutsAtPlantedMinima) {
  const double hop = 0.02;
  std::vector<double> probs(3500, 0.9);  // 70 s
  probs[1250] = 0.05;                     // 25 s
  probs[2500] = 0.05;                     // 50 s
  const FrameProbSeries series{probs, hop};
  const std::vector<SpeechSegment> segs{{0.0, 70.0}};
  const auto chunks = cut_and_merge(segs, series, 30.0);
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_NEAR(chunks[0].end_s, 25.0, 1e-9);
  EXPECT_NEAR(chunks[1].end_s, 50.0, 1e-9);

  // Exhaustive oracle: among all two-cut positions yielding pieces <= 30 s,
  // the planted frames give the smallest summed probability.
  double best = 1e9;
  std::pair<int, int> best_cut{-1, -1};
  for (int a = 1; a < 3500; ++a) {
    for (int b = a + 1; b < 3500; ++b) {
      if (a * hop > 30.0 || (b - a) * hop > 30.0 || 70.0 - b * hop > 30.0) continue;
      const double cost = probs[a] + probs[b];
      if (cost < best) {
        best = cost;
        best_cut = {a, b};
      }
    }
  }
  EXPECT_EQ(best_cut, std::make_pair(1250, 2500));
  for (const auto& c : chunks) EXPECT_LE(c.end_s - c.start_s, 30.0);
}

TEST(CutAndMerge, FlatProbabilitiesStillRespectCap) {
  const FrameProbSeries series{std::vector<double>(5000, 0.7), 0.02};
  const std::vector<SpeechSegment> segs{{0.0, 100.0}};
  const auto chunks = cut_and_merge(segs, series, 30.0);
  for (const auto& c : chunks) EXPECT_LE(c.end_s - c.start_s, 30.0 + 1e-9);
  EXPECT_DOUBLE_EQ(chunks.front().start_s, 0.0);
  EXPECT_DOUBLE_EQ(chunks.back().end_s, 100.0);
}

TEST(CutAndMerge, EmptyCutWindowFallsBackToMidpoint) {
  // The series ends before the segment does, so no frame lies in the window.
  const FrameProbSeries series{std::vector<double>(10, 0.7), 0.02};
  const std::vector<SpeechSegment> segs{{0.0, 40.0}};
  const auto chunks = cut_and_merge(segs, series, 30.0);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_DOUBLE_EQ(chunks[0].end_s, 20.0);
}

TEST(CutAndMerge, MergesCloseNeighboursUpToCap) {
  const FrameProbSeries series{std::vector<double>(5000, 0.9), 0.02};
  const std::vector<SpeechSegment> segs{{0.0, 5.0}, {5.5, 10.0}, {12.0, 14.0}, {14.5, 44.0}};
  // The last segment fits alone but not together with [12, 14).
  const auto chunks = cut_and_merge(segs, series, 30.0, 1.0);
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_DOUBLE_EQ(chunks[0].end_s, 10.0);
  EXPECT_EQ(chunks[0].source_segment_ids, (std::vector<std::size_t>{0, 1}));
  EXPECT_DOUBLE_EQ(chunks[1].start_s, 12.0);
  EXPECT_DOUBLE_EQ(chunks[1].end_s, 14.0);
}

TEST(CutAndMerge, RandomSetsNeverExceedCapAndCoverSpeech) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> probs(15000);
    for (auto& p : probs) p = u(rng);
    const FrameProbSeries series{probs, 0.02};
    std::vector<SpeechSegment> segs;
    double cursor = 0.0;
    while (true) {
      const double start = cursor + 3.0 * u(rng);
      const double end = start + 0.1 + 80.0 * u(rng) * u(rng);
      if (end > 300.0) break;
      segs.push_back({start, end});
      cursor = end;
    }
    const auto chunks = cut_and_merge(segs, series, 30.0, 1.0);
    for (const auto& c : chunks) {
      ASSERT_GT(c.end_s - c.start_s, 0.0);
      ASSERT_LE(c.end_s - c.start_s, 30.0 + 1e-9);
    }
    for (const auto& s : segs) {
      // Every point of every segment lies in some chunk.
      for (int k = 0; k <= 20; ++k) {
        const double x = s.start_s + (s.end_s - s.start_s) * k / 20.0;
        bool covered = false;
        for (const auto& c : chunks) covered |= c.start_s - 1e-9 <= x && x <= c.end_s + 1e-9;
        ASSERT_TRUE(covered) << x;
      }
    }
  }
}

TEST(UniformChunks, Examples) {
  auto pairs = [](const std::vector<Chunk>& cs) {
    Pairs p;
    for (const auto& c : cs) p.emplace_back(c.start_s, c.end_s);
    return p;
  };
  expect_same(pairs(uniform_chunks(29.0)), {{0, 29}});
  expect_same(pairs(uniform_chunks(60.0)), {{0, 30}, {30, 60}});
  expect_same(pairs(uniform_chunks(65.0)), {{0, 30}, {30, 60}, {60, 65}});
  EXPECT_THROW(uniform_chunks(0.0), Error);
  EXPECT_THROW(uniform_chunks(-1.0), Error);
}

TEST(FrameProbs, ScriptedVectorPassesThrough) {
  const std::vector<double> probs{0.1, 0.2, 0.9, 0.4, 0.0};
  mock::ScriptedFrameClassifier backend(probs, 0.02);
  const AudioBuffer audio(std::vector<float>(1600, 0.0f), 16000);  // 0.1 s -> 5 frames
  const auto series = frame_probs(audio, backend);
  EXPECT_EQ(series.probs, probs);
  EXPECT_DOUBLE_EQ(series.frame_hop_s, 0.02);
}

TEST(FrameProbs, WrongFrameCountIsProtocolError) {
  mock::ScriptedFrameClassifier backend({0.1, 0.2}, 0.02);
  const AudioBuffer audio(std::vector<float>(1600, 0.0f), 16000);
  try {
    frame_probs(audio, backend);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Protocol);
  }
}

TEST(FrameProbs, EnergyMockOnSilenceAndBurst) {
  mock::EnergyFrameClassifier backend;
  std::vector<float> x(32000, 0.0f);  // 2 s
  for (std::size_t i = 8000; i < 24000; ++i) x[i] = static_cast<float>(0.3 * std::sin(2 * M_PI * 440.0 * i / 16000.0));
  const auto series = frame_probs(AudioBuffer(x, 16000), backend);
  ASSERT_EQ(series.probs.size(), 100u);
  // Oracle: frame RMS in dBFS against the mock's -40 dB threshold.
  for (std::size_t f = 0; f < 100; ++f) {
    std::vector<float> frame(x.begin() + f * 320, x.begin() + (f + 1) * 320);
    const double r = oracle::rms(frame);
    if (r == 0.0) EXPECT_LT(series.probs[f], 0.1) << f;
    else if (20 * std::log10(r) > -30.0) EXPECT_GE(series.probs[f], 0.9) << f;
  }
  for (std::size_t f = 0; f < 25; ++f) EXPECT_LT(series.probs[f], 0.1);
  for (std::size_t f = 26; f < 74; ++f) EXPECT_GE(series.probs[f], 0.9);
}

TEST(SmartChunks, ChainsStages) {
  std::vector<double> probs(500, 0.0);  // 10 s
  for (std::size_t i = 50; i < 150; ++i) probs[i] = 0.9;
  for (std::size_t i = 300; i < 302; ++i) probs[i] = 0.9;  // 40 ms blip, dropped
  const auto chunks = smart_chunks({probs, 0.02}, SegmentationParams{});
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_NEAR(chunks[0].start_s, 1.0, 1e-9);
  EXPECT_NEAR(chunks[0].end_s, 3.0, 1e-9);
}

TEST(SpeechProbs, FromBlankPosterior) {
  const std::vector<double> blank{1.0, 0.25, 0.0, 1.2, -0.1};
  const auto p = speech_probs_from_blank(blank);
  ASSERT_EQ(p.size(), 5u);
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 0.75);
  EXPECT_DOUBLE_EQ(p[2], 1.0);
  EXPECT_DOUBLE_EQ(p[3], 0.0);
  EXPECT_DOUBLE_EQ(p[4], 1.0);
}
