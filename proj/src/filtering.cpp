#include "longscribe/filtering.hpp"

#include <algorithm>
#include <cmath>

#include "longscribe/error.hpp"

namespace longscribe {

void SegmentLabelScores::validate() const {
  require(!scores.empty(), "segment classifier returned no labels");
  for (const auto& [label, value] : scores) {
    if (!(value >= 0.0 && value <= 1.0)) {
      fail(ErrorKind::InvalidArgument,
           "label '" + label + "' score " + std::to_string(value) + " outside [0, 1]");
    }
  }
}

double SegmentLabelScores::score(const std::string& label) const {
  auto it = scores.find(label);
  return it == scores.end() ? 0.0 : it->second;
}

double SegmentLabelScores::max_over(const std::set<std::string>& labels) const {
  double best = 0.0;
  for (const auto& label : labels) best = std::max(best, score(label));
  return best;
}

const std::set<std::string>& default_speech_labels() {
  static const std::set<std::string> labels = {
      "Speech",
      "Male speech, man speaking",
      "Female speech, woman speaking",
      "Narration, monologue",
  };
  return labels;
}

SegmentLabelScores classify_chunk(const AudioBuffer& buffer, const Chunk& chunk,
                                  SegmentClassifier& backend, std::size_t chunk_id) {
  const AudioBuffer slice = buffer.slice(chunk.start_s, chunk.end_s);
  SegmentLabelScores result;
  try {
    result.scores = backend.classify_segment(slice, {chunk_id, chunk.start_s, chunk.end_s, 1.0});
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::Backend, "segment classifier '" + backend.name() + "' failed: " + e.what());
  }
  try {
    result.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Protocol, "segment classifier '" + backend.name() + "': " + e.what());
  }
  return result;
}

FilterResult filter_chunks(std::span<const Chunk> chunks, const AudioBuffer& buffer,
                           SegmentClassifier& backend, const std::set<std::string>& speech_labels,
                           double threshold) {
  require(!speech_labels.empty(), "speech label set is empty");
  require(threshold >= 0.0 && threshold <= 1.0, "threshold must be in [0, 1]");
  FilterResult result;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const double s = classify_chunk(buffer, chunks[i], backend, i).max_over(speech_labels);
    result.speech_scores.push_back(s);
    (s >= threshold ? result.kept : result.rejected).push_back(chunks[i]);
  }
  return result;
}

}  // namespace longscribe
