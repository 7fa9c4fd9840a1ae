#pragma once

// Line-delimited JSON protocol between the engine and model adapter
// processes. See docs/adapter_protocol.md for the wire format.

#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "longscribe/audio.hpp"
#include "longscribe/backends.hpp"

namespace longscribe::adapter {

using json = nlohmann::json;

inline constexpr std::string_view kClassifyFrames = "classify_frames";
inline constexpr std::string_view kClassifySegment = "classify_segment";
inline constexpr std::string_view kRecognize = "recognize";
inline constexpr std::string_view kScoreSequence = "score_sequence";

// Little-endian PCM16 at 16 kHz, base64. Input at other rates is resampled first.
std::string encode_audio(const AudioBuffer& audio);
AudioBuffer decode_audio(std::string_view base64);

std::string base64_encode(std::string_view bytes);
// Throws Error(Protocol) on malformed input.
std::string base64_decode(std::string_view text);

json make_audio_request(std::string_view op, const AudioBuffer& audio, json params = json::object());
json make_text_request(std::string_view op, std::string_view text, json params = json::object());

// Returns the payload of an ok response; throws Error(Backend) carrying the
// adapter's message for ok=false and Error(Protocol) for anything malformed.
json expect_payload(const json& response, std::string_view op);

// Payload decoders; each validates the payload invariants.
std::vector<double> parse_frame_payload(const json& payload, double& frame_hop_s);
LabelScores parse_segment_payload(const json& payload);
std::vector<TokenPiece> parse_recognize_payload(const json& payload);
double parse_score_payload(const json& payload);

// Payload encoders (used by in-process adapters and tests).
json frame_payload(const std::vector<double>& probs, double frame_hop_s);
json segment_payload(const LabelScores& scores);
json recognize_payload(const std::vector<TokenPiece>& tokens);
json score_payload(double score);

// One adapter process speaking the protocol over its stdin/stdout.
class AdapterProcess {
 public:
  explicit AdapterProcess(const std::string& command);
  ~AdapterProcess();
  AdapterProcess(const AdapterProcess&) = delete;
  AdapterProcess& operator=(const AdapterProcess&) = delete;

  void send_line(std::string_view line);
  std::string read_line();
  json call(const json& request);
  bool running();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Up to `max_processes` copies of a serial adapter, spawned on demand; each
// call borrows an idle process.
class AdapterPool {
 public:
  AdapterPool(std::string command, std::size_t max_processes);
  ~AdapterPool();

  json call(const json& request);
  const std::string& command() const { return command_; }

 private:
  std::string command_;
  std::size_t max_processes_;
  std::mutex mutex_;
  std::condition_variable available_;
  std::vector<std::unique_ptr<AdapterProcess>> idle_;
  std::size_t spawned_ = 0;
};

class SubprocessFrameClassifier final : public FrameClassifier {
 public:
  explicit SubprocessFrameClassifier(std::shared_ptr<AdapterPool> pool, double frame_hop_s = 0.02);
  std::string name() const override;
  double frame_hop_s() const override;
  std::vector<double> classify_frames(const AudioBuffer& audio) override;

 private:
  std::shared_ptr<AdapterPool> pool_;
  mutable std::mutex mutex_;
  double hop_s_;
};

class SubprocessSegmentClassifier final : public SegmentClassifier {
 public:
  explicit SubprocessSegmentClassifier(std::shared_ptr<AdapterPool> pool) : pool_(std::move(pool)) {}
  std::string name() const override;
  LabelScores classify_segment(const AudioBuffer& slice, const ChunkContext& context) override;

 private:
  std::shared_ptr<AdapterPool> pool_;
};

class SubprocessRecognizer final : public Recognizer {
 public:
  explicit SubprocessRecognizer(std::shared_ptr<AdapterPool> pool) : pool_(std::move(pool)) {}
  std::string name() const override;
  std::vector<TokenPiece> recognize(const AudioBuffer& slice, const ChunkContext& context) override;

 private:
  std::shared_ptr<AdapterPool> pool_;
};

class SubprocessSequenceScorer final : public SequenceScorer {
 public:
  explicit SubprocessSequenceScorer(std::shared_ptr<AdapterPool> pool) : pool_(std::move(pool)) {}
  std::string name() const override;
  double score(std::span<const std::string> words) override;

 private:
  std::shared_ptr<AdapterPool> pool_;
};

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;
  bool passed() const;
};

struct ConformanceOptions {
  // Ops the adapter claims to serve; checks for other ops are skipped.
  std::set<std::string> ops = {std::string(kClassifyFrames), std::string(kClassifySegment),
                               std::string(kRecognize), std::string(kScoreSequence)};
  std::size_t pipelined_requests = 8;
};

// Exercises a freshly spawned adapter: payload invariants per op, one-to-one
// ordered responses to pipelined requests, recovery after a truncated line,
// and rejection of unknown ops.
ConformanceReport run_conformance(const std::string& command, const ConformanceOptions& options = {});

}  // namespace longscribe::adapter
