#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "longscribe/audio.hpp"
#include "longscribe/backends.hpp"

namespace longscribe {

// Slack for comparing times derived from frame indices against durations.
inline constexpr double kTimeEpsilon = 1e-9;

struct FrameProbSeries {
  std::vector<double> probs;
  double frame_hop_s = 0.02;

  // Throws unless frame_hop_s > 0 and every prob is in [0, 1].
  void validate() const;
  double duration_s() const { return static_cast<double>(probs.size()) * frame_hop_s; }
};

struct SpeechSegment {
  double start_s = 0.0;
  double end_s = 0.0;

  double duration_s() const { return end_s - start_s; }
  friend bool operator==(const SpeechSegment&, const SpeechSegment&) = default;
};

struct Chunk {
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<std::size_t> source_segment_ids;

  double duration_s() const { return end_s - start_s; }
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct SegmentationParams {
  double onset = 0.5;
  double offset = 0.35;
  double min_on_s = 0.25;
  double min_off_s = 0.2;
  double max_chunk_s = 30.0;
  double merge_gap_s = 1.0;
};

// Hysteresis thresholding: a segment opens at the first frame with
// prob >= onset and closes at the first later frame with prob < offset.
// Requires 0 < offset <= onset < 1.
std::vector<SpeechSegment> binarize(const FrameProbSeries& series, double onset, double offset);

// Fills gaps shorter than min_off_s, then drops segments shorter than min_on_s.
std::vector<SpeechSegment> smooth(std::span<const SpeechSegment> segments, double min_on_s,
                                  double min_off_s);

// Splits segments longer than max_chunk_s at the least-speech-like frame in
// their central half (midpoint if that window holds no frame), recursively,
// then greedily merges neighbours whose gap is <= merge_gap_s while the merged
// span stays <= max_chunk_s.
std::vector<Chunk> cut_and_merge(std::span<const SpeechSegment> segments,
                                 const FrameProbSeries& series, double max_chunk_s = 30.0,
                                 double merge_gap_s = 1.0);

// Back-to-back chunks of chunk_s covering [0, total_duration_s].
std::vector<Chunk> uniform_chunks(double total_duration_s, double chunk_s = 30.0);

// Runs the backend and checks one prob per hop: ceil(duration / hop) values in [0, 1].
FrameProbSeries frame_probs(const AudioBuffer& buffer, FrameClassifier& backend);

// binarize -> smooth -> cut_and_merge with the given parameters.
std::vector<Chunk> smart_chunks(const FrameProbSeries& series, const SegmentationParams& params);

}  // namespace longscribe
