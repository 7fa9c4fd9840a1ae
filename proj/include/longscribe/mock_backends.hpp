#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "longscribe/backends.hpp"

namespace longscribe::mock {

// Frame RMS in dBFS squashed by a logistic: p = 1 / (1 + exp(-(db - threshold_db) / slope_db)).
// Digital silence maps to 0.
struct EnergyParams {
  double threshold_db = -40.0;
  double slope_db = 3.0;
};

double energy_speech_prob(std::span<const float> samples, const EnergyParams& params = {});

class EnergyFrameClassifier final : public FrameClassifier {
 public:
  explicit EnergyFrameClassifier(double frame_hop_s = 0.02, EnergyParams params = {});
  std::string name() const override { return "energy"; }
  double frame_hop_s() const override { return hop_s_; }
  std::vector<double> classify_frames(const AudioBuffer& audio) override;

 private:
  double hop_s_;
  EnergyParams params_;
};

// Returns a fixed probability vector regardless of the audio.
class ScriptedFrameClassifier final : public FrameClassifier {
 public:
  ScriptedFrameClassifier(std::vector<double> probs, double frame_hop_s);
  std::string name() const override { return "scripted-frames"; }
  double frame_hop_s() const override { return hop_s_; }
  std::vector<double> classify_frames(const AudioBuffer& audio) override;

 private:
  std::vector<double> probs_;
  double hop_s_;
};

// {"Speech": p, "Silence": 1 - p} from the slice's overall energy.
class EnergySegmentClassifier final : public SegmentClassifier {
 public:
  explicit EnergySegmentClassifier(EnergyParams params = {}) : params_(params) {}
  std::string name() const override { return "energy"; }
  LabelScores classify_segment(const AudioBuffer& slice, const ChunkContext& context) override;

 private:
  EnergyParams params_;
};

// Answers with scores[chunk_id]; chunks past the end get `fallback`.
class ScriptedSegmentClassifier final : public SegmentClassifier {
 public:
  ScriptedSegmentClassifier(std::vector<LabelScores> per_chunk, LabelScores fallback = {{"Speech", 1.0}});
  std::string name() const override { return "scripted-segments"; }
  LabelScores classify_segment(const AudioBuffer& slice, const ChunkContext& context) override;

 private:
  std::vector<LabelScores> per_chunk_;
  LabelScores fallback_;
};

// One scripted utterance on the original time axis. `tokens` is the base
// recognizer's answer; the optional variants stand in for the additional
// model and for the base model on stretched audio.
struct ScriptEntry {
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<TokenPiece> tokens;  // token times, when present, are absolute seconds
  std::optional<std::vector<TokenPiece>> additional_tokens;
  std::optional<std::vector<TokenPiece>> stretched_tokens;
};

struct RecognitionScript {
  std::vector<ScriptEntry> entries;
};

// JSON: {"entries": [{"start_s", "end_s", "tokens": [TOKEN...],
//         "additional_tokens"?: [...], "stretched_tokens"?: [...]}]}
// TOKEN: {"text": utf8 | "hex": bytes-as-hex, "logprob", "start_s"?, "end_s"?, "special"?}
RecognitionScript parse_recognition_script(std::string_view json);
RecognitionScript load_recognition_script(const std::filesystem::path& path);
std::string to_json(const RecognitionScript& script);

enum class ScriptRole { Base, Additional };

// Returns, in start order, the tokens of every entry whose midpoint falls in
// the requested chunk (mapped back to the original axis by time_scale).
// Base role answers stretched requests with stretched_tokens when scripted.
class ScriptedRecognizer final : public Recognizer {
 public:
  explicit ScriptedRecognizer(RecognitionScript script, ScriptRole role = ScriptRole::Base);
  std::string name() const override;
  std::vector<TokenPiece> recognize(const AudioBuffer& slice, const ChunkContext& context) override;

 private:
  RecognitionScript script_;
  ScriptRole role_;
};

class ConstantScorer final : public SequenceScorer {
 public:
  explicit ConstantScorer(double value = 0.0) : value_(value) {}
  std::string name() const override { return "constant"; }
  double score(std::span<const std::string>) override { return value_; }

 private:
  double value_;
};

// Sum of add-one smoothed log unigram probabilities over normalized words.
class UnigramScorer final : public SequenceScorer {
 public:
  explicit UnigramScorer(std::map<std::string, double> counts);
  std::string name() const override { return "unigram"; }
  double score(std::span<const std::string> words) override;
  double log_prob(std::string_view word) const;

 private:
  std::map<std::string, double> counts_;
  double denominator_ = 1.0;
};

// "word<TAB>count" lines; '#' starts a comment.
UnigramScorer load_unigram_scorer(const std::filesystem::path& path);

}  // namespace longscribe::mock
