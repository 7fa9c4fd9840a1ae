#include "longscribe/adapter_protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <mutex>

#include <boost/process.hpp>
#include <openssl/evp.h>

#include "longscribe/error.hpp"
#include "longscribe/text.hpp"

namespace longscribe::adapter {

namespace bp = boost::process;

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) fail(ErrorKind::Protocol, "base64 length is not a multiple of 4");
  std::size_t padding = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool alnum = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    if (alnum || c == '+' || c == '/') {
      if (padding > 0) fail(ErrorKind::Protocol, "base64 data after padding");
      continue;
    }
    if (c == '=' && i + 2 >= text.size()) {
      ++padding;
      continue;
    }
    fail(ErrorKind::Protocol, "invalid base64 character");
  }
  if (text.empty()) return {};
  std::string out(text.size() / 4 * 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) fail(ErrorKind::Protocol, "invalid base64");
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

std::string encode_audio(const AudioBuffer& audio) {
  const AudioBuffer internal = to_internal_rate(audio);
  std::string bytes;
  bytes.reserve(internal.size() * 2);
  for (float x : internal.samples()) {
    const double scaled = std::clamp(std::round(static_cast<double>(x) * 32768.0), -32768.0, 32767.0);
    const auto v = static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled));
    bytes.push_back(static_cast<char>(v & 0xFF));
    bytes.push_back(static_cast<char>(v >> 8));
  }
  return base64_encode(bytes);
}

AudioBuffer decode_audio(std::string_view base64) {
  const std::string bytes = base64_decode(base64);
  if (bytes.size() % 2 != 0) fail(ErrorKind::Protocol, "PCM16 payload has odd byte count");
  std::vector<float> samples(bytes.size() / 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto lo = static_cast<std::uint8_t>(bytes[2 * i]);
    const auto hi = static_cast<std::uint8_t>(bytes[2 * i + 1]);
    const auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
    samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return AudioBuffer(std::move(samples), kInternalSampleRate);
}

json make_audio_request(std::string_view op, const AudioBuffer& audio, json params) {
  return json{{"op", op}, {"audio", encode_audio(audio)}, {"params", std::move(params)}};
}

json make_text_request(std::string_view op, std::string_view text, json params) {
  return json{{"op", op}, {"text", text}, {"params", std::move(params)}};
}

json expect_payload(const json& response, std::string_view op) {
  const std::string where = "adapter response to " + std::string(op);
  if (!response.is_object()) fail(ErrorKind::Protocol, where + " is not an object");
  const auto ok = response.find("ok");
  if (ok == response.end() || !ok->is_boolean()) {
    fail(ErrorKind::Protocol, where + " lacks boolean 'ok'");
  }
  if (!ok->get<bool>()) {
    std::string message = "no message";
    if (auto e = response.find("error"); e != response.end() && e->is_string()) message = *e;
    fail(ErrorKind::Backend, "adapter rejected " + std::string(op) + ": " + message);
  }
  const auto payload = response.find("payload");
  if (payload == response.end() || !payload->is_object()) {
    fail(ErrorKind::Protocol, where + " lacks object 'payload'");
  }
  return *payload;
}

namespace {

double number_field(const json& object, const char* key, const char* what) {
  const auto it = object.find(key);
  if (it == object.end() || !it->is_number()) {
    fail(ErrorKind::Protocol, std::string(what) + ": missing numeric '" + key + "'");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) fail(ErrorKind::Protocol, std::string(what) + ": non-finite '" + key + "'");
  return v;
}

}  // namespace

std::vector<double> parse_frame_payload(const json& payload, double& frame_hop_s) {
  frame_hop_s = number_field(payload, "frame_hop_s", "classify_frames payload");
  if (!(frame_hop_s > 0.0)) fail(ErrorKind::Protocol, "classify_frames payload: hop must be positive");
  const auto probs = payload.find("probs");
  if (probs == payload.end() || !probs->is_array()) {
    fail(ErrorKind::Protocol, "classify_frames payload: missing array 'probs'");
  }
  std::vector<double> out;
  out.reserve(probs->size());
  for (const auto& p : *probs) {
    if (!p.is_number()) fail(ErrorKind::Protocol, "classify_frames payload: non-numeric prob");
    const double v = p.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::Protocol, "classify_frames payload: prob outside [0,1]");
    out.push_back(v);
  }
  return out;
}

LabelScores parse_segment_payload(const json& payload) {
  const auto scores = payload.find("scores");
  if (scores == payload.end() || !scores->is_object()) {
    fail(ErrorKind::Protocol, "classify_segment payload: missing object 'scores'");
  }
  LabelScores out;
  for (const auto& [label, value] : scores->items()) {
    if (!value.is_number()) fail(ErrorKind::Protocol, "classify_segment payload: non-numeric score");
    const double v = value.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
      fail(ErrorKind::Protocol, "classify_segment payload: score for '" + label + "' outside [0,1]");
    }
    out.emplace(label, v);
  }
  return out;
}

std::vector<TokenPiece> parse_recognize_payload(const json& payload) {
  const auto tokens = payload.find("tokens");
  if (tokens == payload.end() || !tokens->is_array()) {
    fail(ErrorKind::Protocol, "recognize payload: missing array 'tokens'");
  }
  std::vector<TokenPiece> out;
  out.reserve(tokens->size());
  for (const auto& t : *tokens) {
    if (!t.is_object()) fail(ErrorKind::Protocol, "recognize payload: token is not an object");
    TokenPiece piece;
    if (auto b = t.find("bytes_b64"); b != t.end() && b->is_string()) {
      piece.bytes = base64_decode(b->get<std::string>());
    } else if (auto s = t.find("text"); s != t.end() && s->is_string()) {
      piece.bytes = s->get<std::string>();
    } else {
      fail(ErrorKind::Protocol, "recognize payload: token needs 'bytes_b64' or 'text'");
    }
    piece.logprob = number_field(t, "logprob", "recognize payload");
    if (t.contains("start_s")) piece.start_s = number_field(t, "start_s", "recognize payload");
    if (t.contains("end_s")) piece.end_s = number_field(t, "end_s", "recognize payload");
    if (auto sp = t.find("special"); sp != t.end()) {
      if (!sp->is_boolean()) fail(ErrorKind::Protocol, "recognize payload: 'special' must be boolean");
      piece.special = sp->get<bool>();
    }
    validate_token(piece);
    out.push_back(std::move(piece));
  }
  return out;
}

double parse_score_payload(const json& payload) {
  return number_field(payload, "score", "score_sequence payload");
}

json frame_payload(const std::vector<double>& probs, double frame_hop_s) {
  return json{{"frame_hop_s", frame_hop_s}, {"probs", probs}};
}

json segment_payload(const LabelScores& scores) {
  json s = json::object();
  for (const auto& [label, v] : scores) s[label] = v;
  return json{{"scores", s}};
}

json recognize_payload(const std::vector<TokenPiece>& tokens) {
  json arr = json::array();
  for (const auto& t : tokens) {
    json o{{"bytes_b64", base64_encode(t.bytes)}, {"logprob", t.logprob}};
    if (t.start_s) o["start_s"] = *t.start_s;
    if (t.end_s) o["end_s"] = *t.end_s;
    if (t.special) o["special"] = true;
    arr.push_back(std::move(o));
  }
  return json{{"tokens", std::move(arr)}};
}

json score_payload(double score) { return json{{"score", score}}; }

// ---------------------------------------------------------------------------

struct AdapterProcess::Impl {
  std::string command;
  bp::pipe to_child;  // unbuffered, so a dead child cannot leave bytes stuck in a stream buffer
  bp::ipstream from_child;
  bp::child child;
};

namespace {
void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}
}  // namespace

AdapterProcess::AdapterProcess(const std::string& command) : impl_(std::make_unique<Impl>()) {
  ignore_sigpipe();
  impl_->command = command;
  try {
    impl_->child = bp::child("/bin/sh", bp::args({"-c", command}), bp::std_in < impl_->to_child,
                             bp::std_out > impl_->from_child);
  } catch (const std::exception& e) {
    fail(ErrorKind::Backend, "cannot start adapter '" + command + "': " + e.what());
  }
}

AdapterProcess::~AdapterProcess() {
  try {
    impl_->to_child.close();
    if (impl_->child.valid() && !impl_->child.wait_for(std::chrono::seconds(2))) {
      impl_->child.terminate();
    }
  } catch (...) {
  }
}

bool AdapterProcess::running() {
  try {
    return impl_->child.running();
  } catch (...) {
    return false;
  }
}

void AdapterProcess::send_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  try {
    std::size_t sent = 0;
    while (sent < data.size()) {
      const int n = impl_->to_child.write(data.data() + sent, static_cast<int>(data.size() - sent));
      if (n <= 0) break;
      sent += static_cast<std::size_t>(n);
    }
    if (sent == data.size()) return;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::Backend, "adapter '" + impl_->command + "' closed its input");
}

std::string AdapterProcess::read_line() {
  std::string line;
  if (!std::getline(impl_->from_child, line)) {
    fail(ErrorKind::Backend, "adapter '" + impl_->command + "' exited without a response");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

json AdapterProcess::call(const json& request) {
  send_line(request.dump());
  const std::string line = read_line();
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Protocol, "adapter '" + impl_->command + "' sent invalid JSON: " + e.what());
  }
}

AdapterPool::AdapterPool(std::string command, std::size_t max_processes)
    : command_(std::move(command)), max_processes_(std::max<std::size_t>(1, max_processes)) {}

AdapterPool::~AdapterPool() = default;

json AdapterPool::call(const json& request) {
  std::unique_ptr<AdapterProcess> process;
  {
    std::unique_lock lock(mutex_);
    available_.wait(lock, [&] { return !idle_.empty() || spawned_ < max_processes_; });
    if (!idle_.empty()) {
      process = std::move(idle_.back());
      idle_.pop_back();
    } else {
      ++spawned_;
    }
  }
  try {
    if (!process) process = std::make_unique<AdapterProcess>(command_);
    json response = process->call(request);
    {
      std::lock_guard lock(mutex_);
      idle_.push_back(std::move(process));
    }
    available_.notify_one();
    return response;
  } catch (...) {
    // A process that failed mid-call is discarded; a fresh one replaces it on demand.
    {
      std::lock_guard lock(mutex_);
      --spawned_;
    }
    available_.notify_one();
    throw;
  }
}

SubprocessFrameClassifier::SubprocessFrameClassifier(std::shared_ptr<AdapterPool> pool,
                                                     double frame_hop_s)
    : pool_(std::move(pool)), hop_s_(frame_hop_s) {}

std::string SubprocessFrameClassifier::name() const { return "cmd:" + pool_->command(); }

double SubprocessFrameClassifier::frame_hop_s() const {
  std::lock_guard lock(mutex_);
  return hop_s_;
}

std::vector<double> SubprocessFrameClassifier::classify_frames(const AudioBuffer& audio) {
  const json payload = expect_payload(pool_->call(make_audio_request(kClassifyFrames, audio)),
                                      kClassifyFrames);
  double hop = 0.0;
  auto probs = parse_frame_payload(payload, hop);
  std::lock_guard lock(mutex_);
  hop_s_ = hop;
  return probs;
}

namespace {
json context_params(const ChunkContext& c) {
  return json{{"chunk_id", c.chunk_id}, {"start_s", c.start_s}, {"end_s", c.end_s},
              {"time_scale", c.time_scale}};
}
}  // namespace

std::string SubprocessSegmentClassifier::name() const { return "cmd:" + pool_->command(); }

LabelScores SubprocessSegmentClassifier::classify_segment(const AudioBuffer& slice,
                                                          const ChunkContext& context) {
  return parse_segment_payload(expect_payload(
      pool_->call(make_audio_request(kClassifySegment, slice, context_params(context))),
      kClassifySegment));
}

std::string SubprocessRecognizer::name() const { return "cmd:" + pool_->command(); }

std::vector<TokenPiece> SubprocessRecognizer::recognize(const AudioBuffer& slice,
                                                        const ChunkContext& context) {
  return parse_recognize_payload(expect_payload(
      pool_->call(make_audio_request(kRecognize, slice, context_params(context))), kRecognize));
}

std::string SubprocessSequenceScorer::name() const { return "cmd:" + pool_->command(); }

double SubprocessSequenceScorer::score(std::span<const std::string> words) {
  return parse_score_payload(expect_payload(
      pool_->call(make_text_request(kScoreSequence, join_words({words.begin(), words.end()}))), kScoreSequence));
}

// ---------------------------------------------------------------------------

bool ConformanceReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

namespace {

AudioBuffer probe_audio(double seconds) {
  const auto n = static_cast<std::size_t>(seconds * kInternalSampleRate);
  std::vector<float> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    // 440 Hz tone in the second half, silence in the first.
    s[i] = i < n / 2 ? 0.0f
                     : static_cast<float>(0.3 * std::sin(2.0 * M_PI * 440.0 * static_cast<double>(i) /
                                                         kInternalSampleRate));
  }
  return AudioBuffer(std::move(s), kInternalSampleRate);
}

json probe_request(std::string_view op, const AudioBuffer& audio) {
  if (op == kScoreSequence) return make_text_request(op, "the quick brown fox");
  json params{{"chunk_id", 0}, {"start_s", 0.0}, {"end_s", audio.duration_s()}, {"time_scale", 1.0}};
  return make_audio_request(op, audio, params);
}

template <typename F>
ConformanceCheck run_check(std::string name, F&& body) {
  ConformanceCheck check{std::move(name), false, {}};
  try {
    check.detail = body();
    check.passed = true;
  } catch (const std::exception& e) {
    check.detail = e.what();
  }
  return check;
}

std::string check_op(AdapterProcess& proc, std::string_view op, const AudioBuffer& audio) {
  const json payload = expect_payload(proc.call(probe_request(op, audio)), op);
  if (op == kClassifyFrames) {
    double hop = 0.0;
    const auto probs = parse_frame_payload(payload, hop);
    const auto expected = static_cast<std::size_t>(std::ceil(audio.duration_s() / hop - 1e-9));
    if (probs.size() != expected) {
      fail(ErrorKind::Protocol, std::to_string(probs.size()) + " frames, expected " +
                                    std::to_string(expected));
    }
    return std::to_string(probs.size()) + " frames at hop " + std::to_string(hop);
  }
  if (op == kClassifySegment) {
    const auto scores = parse_segment_payload(payload);
    if (scores.empty()) fail(ErrorKind::Protocol, "no labels");
    return std::to_string(scores.size()) + " labels";
  }
  if (op == kRecognize) {
    const auto tokens = parse_recognize_payload(payload);
    std::string all;
    for (const auto& t : tokens) {
      if (t.special) continue;
      all += t.bytes;
      if (t.start_s && t.end_s && *t.start_s > *t.end_s) fail(ErrorKind::Protocol, "token ends before it starts");
    }
    if (!utf8::is_valid(all)) fail(ErrorKind::Protocol, "token bytes do not form valid UTF-8");
    return std::to_string(tokens.size()) + " tokens";
  }
  return "score " + std::to_string(parse_score_payload(payload));
}

}  // namespace

ConformanceReport run_conformance(const std::string& command, const ConformanceOptions& options) {
  ConformanceReport report;
  std::unique_ptr<AdapterProcess> proc;
  report.checks.push_back(run_check("spawn", [&] {
    proc = std::make_unique<AdapterProcess>(command);
    return std::string("started");
  }));
  if (!proc) return report;

  const AudioBuffer audio = probe_audio(1.0);
  const std::vector<std::string_view> all_ops = {kClassifyFrames, kClassifySegment, kRecognize,
                                                 kScoreSequence};
  std::vector<std::string_view> ops;
  for (auto op : all_ops) {
    if (options.ops.count(std::string(op))) ops.push_back(op);
  }
  for (auto op : ops) {
    report.checks.push_back(
        run_check(std::string(op) + " payload", [&] { return check_op(*proc, op, audio); }));
  }

  if (!ops.empty()) {
    report.checks.push_back(run_check("pipelined order", [&] {
      const std::size_t n = std::max<std::size_t>(2, options.pipelined_requests);
      for (std::size_t i = 0; i < n; ++i) {
        json req = probe_request(ops[i % ops.size()], audio);
        req["id"] = "req-" + std::to_string(i);
        proc->send_line(req.dump());
      }
      for (std::size_t i = 0; i < n; ++i) {
        const json resp = json::parse(proc->read_line());
        const std::string want = "req-" + std::to_string(i);
        if (!resp.contains("id") || resp["id"] != want) {
          fail(ErrorKind::Protocol, "response " + std::to_string(i) + " carries id " +
                                        (resp.contains("id") ? resp["id"].dump() : "<none>") +
                                        ", expected \"" + want + "\"");
        }
        expect_payload(resp, ops[i % ops.size()]);
      }
      return std::to_string(n) + " responses in order";
    }));
  }

  report.checks.push_back(run_check("malformed line", [&] {
    proc->send_line("{\"op\": \"score_seq");
    const json resp = json::parse(proc->read_line());
    if (!resp.is_object() || !resp.contains("ok") || resp["ok"] != false) {
      fail(ErrorKind::Protocol, "expected ok=false, got " + resp.dump());
    }
    if (!ops.empty()) expect_payload(proc->call(probe_request(ops.front(), audio)), ops.front());
    return std::string("rejected and recovered");
  }));

  report.checks.push_back(run_check("unknown op", [&] {
    const json resp = proc->call(json{{"op", "no_such_op"}, {"params", json::object()}});
    if (!resp.is_object() || !resp.contains("ok") || resp["ok"] != false) {
      fail(ErrorKind::Protocol, "expected ok=false, got " + resp.dump());
    }
    return std::string("rejected");
  }));
  return report;
}

}  // namespace longscribe::adapter
