#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "longscribe/alignment.hpp"
#include "longscribe/recognition.hpp"
#include "longscribe/segmentation.hpp"

namespace longscribe {

std::string_view version();

enum class Chunking { Smart, Uniform };
enum class UncertaintyMode { None, Scores, Disagreement, Tta, Ensemble };

std::string_view to_string(Chunking chunking);
std::string_view to_string(UncertaintyMode mode);
std::optional<Chunking> parse_chunking(std::string_view name);
std::optional<UncertaintyMode> parse_uncertainty_mode(std::string_view name);

// Backend spec strings:
//   frame_classifier     energy | cmd:<shell command>
//   segment_classifier   energy | accept | cmd:<shell command>
//   recognizer           script:<path> | cmd:<shell command>
//   additional_recognizer  same as recognizer, or empty
//   sequence_scorer      empty | constant | unigram:<path> | cmd:<shell command>
struct BackendSpecs {
  std::string frame_classifier = "energy";
  std::string segment_classifier = "energy";
  std::string recognizer;
  std::string additional_recognizer;
  std::string sequence_scorer;
};

struct PipelineConfig {
  Chunking chunking = Chunking::Smart;
  double uniform_chunk_s = 30.0;
  SegmentationParams segmentation;

  bool ast_filter = true;
  std::set<std::string> speech_labels;  // empty means the default AudioSet labels
  double speech_threshold = 0.3;

  UncertaintyMode uncertainty = UncertaintyMode::None;
  double score_threshold = -1.0;
  ScoreReduction reduction = ScoreReduction::Min;
  int stretch_up = 4;
  int stretch_down = 3;
  bool tta_refine = false;
  bool flag_deletes = true;
  double refine_pair_threshold = 0.5;
  LmValidationParams lm;
  std::vector<UncertaintyMode> ensemble_members = {UncertaintyMode::Scores,
                                                   UncertaintyMode::Disagreement};

  int worker_count = 1;
  BackendSpecs backends;
};

// Throws Error(Config) describing the first violated constraint.
void validate(const PipelineConfig& config);

// Applies one "key = value" setting; throws Error(Config) on unknown keys or bad values.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

// Plain "key = value" lines; '#' starts a comment, blank lines are ignored.
void apply_config_text(PipelineConfig& config, std::string_view text);
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
EnvLookup process_env();

// LONGSCRIBE_FRAME_CLASSIFIER, LONGSCRIBE_SEGMENT_CLASSIFIER, LONGSCRIBE_RECOGNIZER,
// LONGSCRIBE_ADDITIONAL_RECOGNIZER, LONGSCRIBE_SEQUENCE_SCORER.
void apply_env_overrides(PipelineConfig& config, const EnvLookup& env = process_env());

// Serialization in the config-file format; apply_config_text(to_config_text(c)) reproduces c.
std::string to_config_text(const PipelineConfig& config);
nlohmann::ordered_json to_json(const PipelineConfig& config);

}  // namespace longscribe
