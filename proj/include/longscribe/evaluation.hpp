#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "longscribe/config.hpp"
#include "longscribe/metrics.hpp"
#include "longscribe/pipeline.hpp"

namespace longscribe {

struct EvalItem {
  std::filesystem::path audio;
  std::vector<std::string> reference;  // reference words
  // Per-item backend overrides (e.g. one recognition script per file).
  std::optional<std::string> recognizer;
  std::optional<std::string> additional_recognizer;
};

struct EvalManifest {
  std::vector<EvalItem> items;
  std::optional<std::filesystem::path> noise;
  double snr_db = 1.0;
  std::vector<double> thresholds;  // score sweep, ascending; may be empty
};

// JSON manifest:
//   {"items": [{"audio", "reference" (path) | "reference_text",
//               "recognizer"?, "additional_recognizer"?}],
//    "audio_dir"?, "reference_dir"?,       // pairs <stem>.wav with <stem>.txt
//    "noise"?: {"path", "snr_db"}, "thresholds"?: [...]}
// Relative paths resolve against the manifest's directory. A missing
// reference is Error(FileNotFound).
EvalManifest parse_eval_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir);
EvalManifest load_eval_manifest(const std::filesystem::path& path);

struct TimingSummary {
  double max_s = 0.0;
  double mean_s = 0.0;
  double median_s = 0.0;
};
// Median of an even count is the mean of the two middle values. Empty input gives zeros.
TimingSummary summarize_timing(std::vector<double> seconds);

struct FileEvaluation {
  std::string audio;
  EvalReport report;
  std::optional<UncertaintyPoint> uncertainty;
  std::vector<UncertaintyPoint> sweep;
  std::optional<double> achieved_snr_db;
  TimingReport timing;
};

struct EvaluationResult {
  std::vector<FileEvaluation> files;
  double mean_wer = 0.0;
  std::optional<UncertaintyPoint> mean_uncertainty;
  std::vector<UncertaintyPoint> mean_sweep;  // per threshold, averaged over files
  TimingSummary timing;
};

EvaluationResult evaluate(const EvalManifest& manifest, const PipelineConfig& config);

nlohmann::ordered_json to_json(const EvaluationResult& result);
// One row per file: audio,wer,n_ref_words,n_hyp_words,missed_ref_words,uncertainty_ratio,error_recall,total_s
std::string files_to_csv(const EvaluationResult& result);

}  // namespace longscribe
