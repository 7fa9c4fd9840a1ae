#include "longscribe/mock_backends.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "longscribe/error.hpp"
#include "longscribe/segmentation.hpp"
#include "longscribe/text.hpp"

namespace longscribe::mock {

using nlohmann::json;

double energy_speech_prob(std::span<const float> samples, const EnergyParams& params) {
  const double level = rms(samples);
  if (level <= 0.0) return 0.0;
  const double db = 20.0 * std::log10(level);
  return 1.0 / (1.0 + std::exp(-(db - params.threshold_db) / params.slope_db));
}

EnergyFrameClassifier::EnergyFrameClassifier(double frame_hop_s, EnergyParams params)
    : hop_s_(frame_hop_s), params_(params) {
  require(frame_hop_s > 0.0, "frame hop must be positive");
}

std::vector<double> EnergyFrameClassifier::classify_frames(const AudioBuffer& audio) {
  const auto frames = static_cast<std::size_t>(
      std::max(0.0, std::ceil(audio.duration_s() / hop_s_ - kTimeEpsilon)));
  const double hop_samples = hop_s_ * audio.sample_rate();
  const auto samples = audio.samples();
  std::vector<double> probs(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto lo = std::min(samples.size(), static_cast<std::size_t>(std::llround(f * hop_samples)));
    const auto hi = std::min(samples.size(), static_cast<std::size_t>(std::llround((f + 1) * hop_samples)));
    probs[f] = energy_speech_prob(samples.subspan(lo, hi - lo), params_);
  }
  return probs;
}

ScriptedFrameClassifier::ScriptedFrameClassifier(std::vector<double> probs, double frame_hop_s)
    : probs_(std::move(probs)), hop_s_(frame_hop_s) {}

std::vector<double> ScriptedFrameClassifier::classify_frames(const AudioBuffer&) { return probs_; }

LabelScores EnergySegmentClassifier::classify_segment(const AudioBuffer& slice, const ChunkContext&) {
  const double p = energy_speech_prob(slice.samples(), params_);
  return {{"Speech", p}, {"Silence", 1.0 - p}};
}

ScriptedSegmentClassifier::ScriptedSegmentClassifier(std::vector<LabelScores> per_chunk,
                                                     LabelScores fallback)
    : per_chunk_(std::move(per_chunk)), fallback_(std::move(fallback)) {}

LabelScores ScriptedSegmentClassifier::classify_segment(const AudioBuffer&, const ChunkContext& context) {
  return context.chunk_id < per_chunk_.size() ? per_chunk_[context.chunk_id] : fallback_;
}

namespace {

std::string to_hex(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 15]);
  }
  return out;
}

std::string from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) fail(ErrorKind::InvalidArgument, "odd-length hex token");
  std::string out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]);
    const int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) fail(ErrorKind::InvalidArgument, "bad hex digit in token");
    out.push_back(static_cast<char>(hi * 16 + lo));
  }
  return out;
}

TokenPiece token_from_json(const json& j) {
  TokenPiece t;
  if (j.contains("text")) {
    t.bytes = j.at("text").get<std::string>();
  } else if (j.contains("hex")) {
    t.bytes = from_hex(j.at("hex").get<std::string>());
  } else {
    fail(ErrorKind::InvalidArgument, "script token needs \"text\" or \"hex\"");
  }
  t.logprob = j.at("logprob").get<double>();
  if (j.contains("start_s")) t.start_s = j.at("start_s").get<double>();
  if (j.contains("end_s")) t.end_s = j.at("end_s").get<double>();
  t.special = j.value("special", false);
  return t;
}

json token_to_json(const TokenPiece& t) {
  nlohmann::ordered_json j;
  if (utf8::is_valid(t.bytes)) {
    j["text"] = t.bytes;
  } else {
    j["hex"] = to_hex(t.bytes);
  }
  j["logprob"] = t.logprob;
  if (t.start_s) j["start_s"] = *t.start_s;
  if (t.end_s) j["end_s"] = *t.end_s;
  if (t.special) j["special"] = true;
  return j;
}

std::vector<TokenPiece> tokens_from_json(const json& arr) {
  std::vector<TokenPiece> out;
  for (const auto& t : arr) out.push_back(token_from_json(t));
  return out;
}

json tokens_to_json(const std::vector<TokenPiece>& tokens) {
  json arr = json::array();
  for (const auto& t : tokens) arr.push_back(token_to_json(t));
  return arr;
}

}  // namespace

RecognitionScript parse_recognition_script(std::string_view text) {
  RecognitionScript script;
  try {
    const json root = json::parse(text);
    for (const auto& e : root.at("entries")) {
      ScriptEntry entry;
      entry.start_s = e.at("start_s").get<double>();
      entry.end_s = e.at("end_s").get<double>();
      require(entry.end_s >= entry.start_s, "script entry ends before it starts");
      entry.tokens = tokens_from_json(e.at("tokens"));
      if (e.contains("additional_tokens")) entry.additional_tokens = tokens_from_json(e["additional_tokens"]);
      if (e.contains("stretched_tokens")) entry.stretched_tokens = tokens_from_json(e["stretched_tokens"]);
      script.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("recognition script: ") + e.what());
  }
  std::stable_sort(script.entries.begin(), script.entries.end(),
                   [](const ScriptEntry& a, const ScriptEntry& b) { return a.start_s < b.start_s; });
  return script;
}

RecognitionScript load_recognition_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::FileNotFound, "cannot open recognition script " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_recognition_script(buffer.str());
}

std::string to_json(const RecognitionScript& script) {
  nlohmann::ordered_json root;
  root["entries"] = json::array();
  for (const auto& e : script.entries) {
    nlohmann::ordered_json j;
    j["start_s"] = e.start_s;
    j["end_s"] = e.end_s;
    j["tokens"] = tokens_to_json(e.tokens);
    if (e.additional_tokens) j["additional_tokens"] = tokens_to_json(*e.additional_tokens);
    if (e.stretched_tokens) j["stretched_tokens"] = tokens_to_json(*e.stretched_tokens);
    root["entries"].push_back(std::move(j));
  }
  return root.dump(2);
}

ScriptedRecognizer::ScriptedRecognizer(RecognitionScript script, ScriptRole role)
    : script_(std::move(script)), role_(role) {}

std::string ScriptedRecognizer::name() const {
  return role_ == ScriptRole::Base ? "scripted" : "scripted-additional";
}

std::vector<TokenPiece> ScriptedRecognizer::recognize(const AudioBuffer&, const ChunkContext& context) {
  const double scale = context.time_scale;
  const double lo = context.start_s / scale;
  const double hi = context.end_s / scale;
  std::vector<TokenPiece> out;
  for (const auto& entry : script_.entries) {
    const double mid = 0.5 * (entry.start_s + entry.end_s);
    if (mid < lo || mid >= hi) continue;
    const std::vector<TokenPiece>* tokens = &entry.tokens;
    if (role_ == ScriptRole::Additional && entry.additional_tokens) {
      tokens = &*entry.additional_tokens;
    } else if (role_ == ScriptRole::Base && scale != 1.0 && entry.stretched_tokens) {
      tokens = &*entry.stretched_tokens;
    }
    for (TokenPiece t : *tokens) {
      if (t.start_s) t.start_s = *t.start_s * scale - context.start_s;
      if (t.end_s) t.end_s = *t.end_s * scale - context.start_s;
      out.push_back(std::move(t));
    }
  }
  return out;
}

UnigramScorer::UnigramScorer(std::map<std::string, double> counts) {
  double total = 0.0;
  for (const auto& [word, count] : counts) {
    require(count >= 0.0, "unigram counts must be non-negative");
    counts_[normalize_word(word)] += count;
    total += count;
  }
  // Add-one smoothing with one extra slot for unseen words.
  denominator_ = total + static_cast<double>(counts_.size()) + 1.0;
}

double UnigramScorer::log_prob(std::string_view word) const {
  auto it = counts_.find(normalize_word(word));
  const double count = it == counts_.end() ? 0.0 : it->second;
  return std::log((count + 1.0) / denominator_);
}

double UnigramScorer::score(std::span<const std::string> words) {
  double s = 0.0;
  for (const auto& w : words) s += log_prob(w);
  return s;
}

UnigramScorer load_unigram_scorer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::FileNotFound, "cannot open unigram table " + path.string());
  std::map<std::string, double> counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::InvalidArgument, path.string() + ":" + std::to_string(line_no) + ": expected word<TAB>count");
    }
    try {
      counts[line.substr(0, tab)] += std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidArgument, path.string() + ":" + std::to_string(line_no) + ": bad count");
    }
  }
  return UnigramScorer(std::move(counts));
}

}  // namespace longscribe::mock
