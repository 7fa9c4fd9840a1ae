#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "longscribe/audio.hpp"
#include "longscribe/backends.hpp"
#include "longscribe/segmentation.hpp"

namespace longscribe {

// Label -> score in [0, 1], at least one label.
struct SegmentLabelScores {
  LabelScores scores;

  void validate() const;
  // Missing labels score 0.
  double score(const std::string& label) const;
  double max_over(const std::set<std::string>& labels) const;
};

// AudioSet speech labels.
const std::set<std::string>& default_speech_labels();
inline constexpr double kDefaultSpeechThreshold = 0.3;

SegmentLabelScores classify_chunk(const AudioBuffer& buffer, const Chunk& chunk,
                                  SegmentClassifier& backend, std::size_t chunk_id = 0);

struct FilterResult {
  std::vector<Chunk> kept;
  std::vector<Chunk> rejected;
  // Parallel to the input chunks.
  std::vector<double> speech_scores;
};

// Keeps a chunk iff max over speech_labels of its score >= threshold.
// Both outputs preserve input order.
FilterResult filter_chunks(std::span<const Chunk> chunks, const AudioBuffer& buffer,
                           SegmentClassifier& backend, const std::set<std::string>& speech_labels,
                           double threshold);

}  // namespace longscribe
