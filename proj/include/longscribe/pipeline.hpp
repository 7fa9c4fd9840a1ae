#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "longscribe/audio.hpp"
#include "longscribe/backends.hpp"
#include "longscribe/config.hpp"
#include "longscribe/recognition.hpp"
#include "longscribe/segmentation.hpp"
#include "longscribe/uncertainty.hpp"

namespace longscribe {

struct Backends {
  std::shared_ptr<FrameClassifier> frame_classifier;
  std::shared_ptr<SegmentClassifier> segment_classifier;
  std::shared_ptr<Recognizer> recognizer;
  std::shared_ptr<Recognizer> additional_recognizer;  // optional
  std::shared_ptr<SequenceScorer> sequence_scorer;    // optional; enables LM validation
};

// Instantiates the backends named in the specs. Subprocess adapters get one
// process per worker; serial backends are wrapped in a mutex.
Backends make_backends(const BackendSpecs& specs, std::size_t worker_count);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct TimingReport {
  std::vector<StageTiming> stages;
  double total_s = 0.0;
  double max_stage_s() const;
  nlohmann::ordered_json to_json() const;
};

struct PipelineResult {
  Transcription transcription;
  std::optional<UncertaintyMask> mask;
  TimingReport timing;
  double duration_s = 0.0;
  std::vector<Chunk> chunks;           // recognized, in order
  std::vector<Chunk> rejected_chunks;  // dropped by the filter
  std::vector<Transcription> chunk_transcripts;
};

// Runs fn(0) .. fn(n - 1) on at most `workers` threads. The first exception
// (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

// Errors leave as StageError naming the failing stage: read, segmentation,
// filter, recognition, uncertainty.
PipelineResult run_pipeline(const AudioBuffer& audio, const PipelineConfig& config,
                            const Backends& backends);
PipelineResult run_pipeline(const std::filesystem::path& audio_path, const PipelineConfig& config,
                            const Backends& backends);

}  // namespace longscribe
