#include "longscribe/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "longscribe/error.hpp"

namespace longscribe {

void FrameProbSeries::validate() const {
  require(frame_hop_s > 0.0 && std::isfinite(frame_hop_s), "frame hop must be positive");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
      fail(ErrorKind::InvalidArgument,
           "frame " + std::to_string(i) + " probability " + std::to_string(probs[i]) +
               " outside [0, 1]");
    }
  }
}

std::vector<SpeechSegment> binarize(const FrameProbSeries& series, double onset, double offset) {
  require(offset > 0.0 && offset <= onset && onset < 1.0,
          "thresholds must satisfy 0 < offset <= onset < 1");
  series.validate();
  std::vector<SpeechSegment> segments;
  const double hop = series.frame_hop_s;
  bool active = false;
  std::size_t opened = 0;
  for (std::size_t i = 0; i < series.probs.size(); ++i) {
    const double p = series.probs[i];
    if (!active && p >= onset) {
      active = true;
      opened = i;
    } else if (active && p < offset) {
      segments.push_back({static_cast<double>(opened) * hop, static_cast<double>(i) * hop});
      active = false;
    }
  }
  if (active) {
    segments.push_back(
        {static_cast<double>(opened) * hop, static_cast<double>(series.probs.size()) * hop});
  }
  return segments;
}

namespace {

void check_sorted_disjoint(std::span<const SpeechSegment> segments) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    require(segments[i].start_s >= 0.0 && segments[i].end_s > segments[i].start_s,
            "segment " + std::to_string(i) + " has non-positive duration");
    if (i > 0) {
      require(segments[i].start_s >= segments[i - 1].end_s - kTimeEpsilon,
              "segments must be sorted and disjoint");
    }
  }
}

}  // namespace

std::vector<SpeechSegment> smooth(std::span<const SpeechSegment> segments, double min_on_s,
                                  double min_off_s) {
  require(min_on_s >= 0.0 && min_off_s >= 0.0, "smoothing durations must be non-negative");
  check_sorted_disjoint(segments);

  std::vector<SpeechSegment> filled;
  for (const auto& s : segments) {
    if (!filled.empty() && s.start_s - filled.back().end_s < min_off_s - kTimeEpsilon) {
      filled.back().end_s = std::max(filled.back().end_s, s.end_s);
    } else {
      filled.push_back(s);
    }
  }
  std::vector<SpeechSegment> kept;
  for (const auto& s : filled) {
    if (s.duration_s() >= min_on_s - kTimeEpsilon) kept.push_back(s);
  }
  return kept;
}

namespace {

struct Piece {
  double start_s;
  double end_s;
  std::size_t segment_id;
};

void cut_recursively(double start, double end, std::size_t segment_id,
                     const FrameProbSeries& series, double max_chunk_s, std::vector<Piece>& out) {
  const double duration = end - start;
  if (duration <= max_chunk_s) {
    out.push_back({start, end, segment_id});
    return;
  }
  const double hop = series.frame_hop_s;
  const double window_lo = start + 0.25 * duration;
  const double window_hi = end - 0.25 * duration;
  const auto n_frames = static_cast<std::int64_t>(series.probs.size());
  const auto f_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(window_lo / hop - kTimeEpsilon)));
  const auto f_hi = std::min<std::int64_t>(n_frames - 1, static_cast<std::int64_t>(std::floor(window_hi / hop + kTimeEpsilon)));

  double cut = 0.5 * (start + end);
  if (f_lo <= f_hi) {
    std::int64_t best = f_lo;
    for (std::int64_t f = f_lo + 1; f <= f_hi; ++f) {
      if (series.probs[f] < series.probs[best]) best = f;
    }
    cut = static_cast<double>(best) * hop;
  }
  cut_recursively(start, cut, segment_id, series, max_chunk_s, out);
  cut_recursively(cut, end, segment_id, series, max_chunk_s, out);
}

}  // namespace

std::vector<Chunk> cut_and_merge(std::span<const SpeechSegment> segments,
                                 const FrameProbSeries& series, double max_chunk_s,
                                 double merge_gap_s) {
  require(max_chunk_s > 0.0, "max_chunk_s must be positive");
  require(merge_gap_s >= 0.0, "merge_gap_s must be non-negative");
  series.validate();
  check_sorted_disjoint(segments);

  std::vector<Piece> pieces;
  for (std::size_t id = 0; id < segments.size(); ++id) {
    cut_recursively(segments[id].start_s, segments[id].end_s, id, series, max_chunk_s, pieces);
  }

  std::vector<Chunk> chunks;
  for (const auto& piece : pieces) {
    if (!chunks.empty()) {
      Chunk& last = chunks.back();
      const bool close = piece.start_s - last.end_s <= merge_gap_s + kTimeEpsilon;
      const bool fits = piece.end_s - last.start_s <= max_chunk_s;
      if (close && fits) {
        last.end_s = piece.end_s;
        if (last.source_segment_ids.back() != piece.segment_id) {
          last.source_segment_ids.push_back(piece.segment_id);
        }
        continue;
      }
    }
    chunks.push_back({piece.start_s, piece.end_s, {piece.segment_id}});
  }
  return chunks;
}

std::vector<Chunk> uniform_chunks(double total_duration_s, double chunk_s) {
  require(total_duration_s > 0.0 && std::isfinite(total_duration_s),
          "total duration must be positive");
  require(chunk_s > 0.0, "chunk length must be positive");
  const auto count = static_cast<std::size_t>(
      std::max(1.0, std::ceil(total_duration_s / chunk_s - kTimeEpsilon)));
  std::vector<Chunk> chunks;
  chunks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double start = static_cast<double>(i) * chunk_s;
    const double end = i + 1 == count ? total_duration_s : static_cast<double>(i + 1) * chunk_s;
    chunks.push_back({start, end, {}});
  }
  return chunks;
}

FrameProbSeries frame_probs(const AudioBuffer& buffer, FrameClassifier& backend) {
  FrameProbSeries series;
  try {
    series.probs = backend.classify_frames(buffer);
    // Queried afterwards: remote classifiers learn their hop from the response.
    series.frame_hop_s = backend.frame_hop_s();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::Backend, "frame classifier '" + backend.name() + "' failed: " + e.what());
  }
  if (!(series.frame_hop_s > 0.0)) {
    fail(ErrorKind::Protocol, "frame classifier '" + backend.name() + "' reported hop " +
                                  std::to_string(series.frame_hop_s));
  }
  const auto expected = static_cast<std::size_t>(
      std::max(0.0, std::ceil(buffer.duration_s() / series.frame_hop_s - kTimeEpsilon)));
  if (series.probs.size() != expected) {
    fail(ErrorKind::Protocol, "frame classifier '" + backend.name() + "' returned " +
                                  std::to_string(series.probs.size()) + " frames for " +
                                  std::to_string(buffer.duration_s()) + " s at hop " +
                                  std::to_string(series.frame_hop_s) + " (expected " +
                                  std::to_string(expected) + ")");
  }
  try {
    series.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Protocol, "frame classifier '" + backend.name() + "': " + e.what());
  }
  return series;
}

std::vector<Chunk> smart_chunks(const FrameProbSeries& series, const SegmentationParams& params) {
  const auto raw = binarize(series, params.onset, params.offset);
  const auto smoothed = smooth(raw, params.min_on_s, params.min_off_s);
  return cut_and_merge(smoothed, series, params.max_chunk_s, params.merge_gap_s);
}

}  // namespace longscribe
