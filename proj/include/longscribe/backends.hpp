#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longscribe/audio.hpp"

namespace longscribe {

// Where a slice handed to a backend sits in the source recording.
// time_scale is 1 for the original audio and up/down for stretched audio
// (start_s/end_s are then on the stretched time axis).
struct ChunkContext {
  std::size_t chunk_id = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double time_scale = 1.0;
};

// One recognizer output token: raw bytes (possibly a partial UTF-8 code
// point) and its log-probability. Times are chunk-relative when present.
struct TokenPiece {
  std::string bytes;
  double logprob = 0.0;
  std::optional<double> start_s;
  std::optional<double> end_s;
  bool special = false;
};

// Throws Error(Protocol) unless bytes are non-empty and logprob is finite and <= 0.
void validate_token(const TokenPiece& token);

using LabelScores = std::map<std::string, double>;

// Per-frame speech probability source (the segmenter).
class FrameClassifier {
 public:
  virtual ~FrameClassifier() = default;
  virtual std::string name() const = 0;
  virtual double frame_hop_s() const = 0;
  virtual std::vector<double> classify_frames(const AudioBuffer& audio) = 0;
  // False means calls must be serialized by the caller.
  virtual bool thread_safe() const { return true; }
};

// Segment-level audio tagger (the false-positive filter).
class SegmentClassifier {
 public:
  virtual ~SegmentClassifier() = default;
  virtual std::string name() const = 0;
  virtual LabelScores classify_segment(const AudioBuffer& slice, const ChunkContext& context) = 0;
  virtual bool thread_safe() const { return true; }
};

class Recognizer {
 public:
  virtual ~Recognizer() = default;
  virtual std::string name() const = 0;
  virtual std::vector<TokenPiece> recognize(const AudioBuffer& slice,
                                            const ChunkContext& context) = 0;
  // Tokens excluded from word grouping. Default: tokens flagged by the backend,
  // plus Whisper-style "<|...|>" markers.
  virtual bool is_special(const TokenPiece& token) const;
  virtual bool thread_safe() const { return true; }
};

// Language-model plausibility of a word sequence; higher is better.
class SequenceScorer {
 public:
  virtual ~SequenceScorer() = default;
  virtual std::string name() const = 0;
  virtual double score(std::span<const std::string> words) = 0;
  virtual bool thread_safe() const { return true; }
};

// Wrap backends that declare themselves serial in a mutex-guarded decorator;
// thread-safe backends are returned unchanged.
std::shared_ptr<FrameClassifier> guard(std::shared_ptr<FrameClassifier> backend);
std::shared_ptr<SegmentClassifier> guard(std::shared_ptr<SegmentClassifier> backend);
std::shared_ptr<Recognizer> guard(std::shared_ptr<Recognizer> backend);
std::shared_ptr<SequenceScorer> guard(std::shared_ptr<SequenceScorer> backend);

// Maps CTC blank posteriors to speech probability as 1 - P(blank), clamped to [0, 1].
std::vector<double> speech_probs_from_blank(std::span<const double> blank_probs);

}  // namespace longscribe
