#include "longscribe/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "longscribe/error.hpp"
#include "longscribe/filtering.hpp"

#ifndef LONGSCRIBE_VERSION
#define LONGSCRIBE_VERSION "0.0.0"
#endif

namespace longscribe {

std::string_view version() { return LONGSCRIBE_VERSION; }

std::string_view to_string(Chunking chunking) {
  return chunking == Chunking::Smart ? "smart" : "uniform";
}

std::string_view to_string(UncertaintyMode mode) {
  switch (mode) {
    case UncertaintyMode::None: return "none";
    case UncertaintyMode::Scores: return "scores";
    case UncertaintyMode::Disagreement: return "disagreement";
    case UncertaintyMode::Tta: return "tta";
    case UncertaintyMode::Ensemble: return "ensemble";
  }
  return "none";
}

std::optional<Chunking> parse_chunking(std::string_view name) {
  if (name == "smart") return Chunking::Smart;
  if (name == "uniform") return Chunking::Uniform;
  return std::nullopt;
}

std::optional<UncertaintyMode> parse_uncertainty_mode(std::string_view name) {
  for (auto m : {UncertaintyMode::None, UncertaintyMode::Scores, UncertaintyMode::Disagreement,
                 UncertaintyMode::Tta, UncertaintyMode::Ensemble}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  fail(ErrorKind::Config, "setting '" + std::string(key) + "': cannot use '" + std::string(value) +
                              "' (expected " + std::string(want) + ")");
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

long parse_int(std::string_view key, std::string_view v) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::size_t parse_count(std::string_view key, std::string_view v) {
  const long n = parse_int(key, v);
  if (n < 0) bad_value(key, v, "a non-negative integer");
  return static_cast<std::size_t>(n);
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  bad_value(key, v, "on or off");
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ",";
    out += s;
  }
  return out;
}

struct Setting {
  std::string_view key;
  std::function<void(PipelineConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
Setting double_setting(std::string_view key, T member) {
  return {key,
          [member](PipelineConfig& c, std::string_view k, std::string_view v) {
            member(c) = parse_double(k, v);
          },
          [member](const PipelineConfig& c) {
            return format_double(member(c));
          }};
}

template <typename T>
Setting count_setting(std::string_view key, T member) {
  return {key,
          [member](PipelineConfig& c, std::string_view k, std::string_view v) {
            member(c) = parse_count(k, v);
          },
          [member](const PipelineConfig& c) {
            return std::to_string(member(c));
          }};
}

template <typename T>
Setting bool_setting(std::string_view key, T member) {
  return {key,
          [member](PipelineConfig& c, std::string_view k, std::string_view v) {
            member(c) = parse_bool(k, v);
          },
          [member](const PipelineConfig& c) {
            return std::string(member(c) ? "on" : "off");
          }};
}

template <typename T>
Setting string_setting(std::string_view key, T member) {
  return {key,
          [member](PipelineConfig& c, std::string_view, std::string_view v) { member(c) = v; },
          [member](const PipelineConfig& c) { return member(c); }};
}

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = {
      {"chunking",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         auto p = parse_chunking(v);
         if (!p) bad_value(k, v, "smart or uniform");
         c.chunking = *p;
       },
       [](const PipelineConfig& c) { return std::string(to_string(c.chunking)); }},
      double_setting("uniform_chunk_s", [](auto& c) -> auto& { return c.uniform_chunk_s; }),
      double_setting("onset", [](auto& c) -> auto& { return c.segmentation.onset; }),
      double_setting("offset", [](auto& c) -> auto& { return c.segmentation.offset; }),
      double_setting("min_on_s", [](auto& c) -> auto& { return c.segmentation.min_on_s; }),
      double_setting("min_off_s", [](auto& c) -> auto& { return c.segmentation.min_off_s; }),
      double_setting("max_chunk_s", [](auto& c) -> auto& { return c.segmentation.max_chunk_s; }),
      double_setting("merge_gap_s", [](auto& c) -> auto& { return c.segmentation.merge_gap_s; }),
      bool_setting("ast_filter", [](auto& c) -> auto& { return c.ast_filter; }),
      {"speech_labels",
       [](PipelineConfig& c, std::string_view, std::string_view v) {
         const auto items = split_list(v);
         c.speech_labels = {items.begin(), items.end()};
       },
       [](const PipelineConfig& c) {
         return join_list({c.speech_labels.begin(), c.speech_labels.end()});
       }},
      double_setting("speech_threshold", [](auto& c) -> auto& { return c.speech_threshold; }),
      {"uncertainty",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         auto p = parse_uncertainty_mode(v);
         if (!p) bad_value(k, v, "none, scores, disagreement, tta or ensemble");
         c.uncertainty = *p;
       },
       [](const PipelineConfig& c) { return std::string(to_string(c.uncertainty)); }},
      double_setting("score_threshold", [](auto& c) -> auto& { return c.score_threshold; }),
      {"score_reduction",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         auto p = parse_reduction(v);
         if (!p) bad_value(k, v, "min, sum or mean");
         c.reduction = *p;
       },
       [](const PipelineConfig& c) { return std::string(to_string(c.reduction)); }},
      {"stretch_up",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.stretch_up = static_cast<int>(parse_int(k, v));
       },
       [](const PipelineConfig& c) { return std::to_string(c.stretch_up); }},
      {"stretch_down",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.stretch_down = static_cast<int>(parse_int(k, v));
       },
       [](const PipelineConfig& c) { return std::to_string(c.stretch_down); }},
      bool_setting("tta_refine", [](auto& c) -> auto& { return c.tta_refine; }),
      bool_setting("flag_deletes", [](auto& c) -> auto& { return c.flag_deletes; }),
      double_setting("refine_pair_threshold",
                     [](auto& c) -> auto& { return c.refine_pair_threshold; }),
      count_setting("lm_lookahead", [](auto& c) -> auto& { return c.lm.lookahead; }),
      count_setting("lm_group_max", [](auto& c) -> auto& { return c.lm.group_max; }),
      count_setting("lm_context_words",
                    [](auto& c) -> auto& { return c.lm.context_words; }),
      {"ensemble_members",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.ensemble_members.clear();
         for (const auto& item : split_list(v)) {
           auto p = parse_uncertainty_mode(item);
           if (!p || *p == UncertaintyMode::None || *p == UncertaintyMode::Ensemble) {
             bad_value(k, item, "scores, disagreement or tta");
           }
           c.ensemble_members.push_back(*p);
         }
       },
       [](const PipelineConfig& c) {
         std::vector<std::string> names;
         for (auto m : c.ensemble_members) names.emplace_back(to_string(m));
         return join_list(names);
       }},
      {"worker_count",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.worker_count = static_cast<int>(parse_int(k, v));
       },
       [](const PipelineConfig& c) { return std::to_string(c.worker_count); }},
      string_setting("frame_classifier",
                     [](auto& c) -> auto& { return c.backends.frame_classifier; }),
      string_setting("segment_classifier",
                     [](auto& c) -> auto& { return c.backends.segment_classifier; }),
      string_setting("recognizer", [](auto& c) -> auto& { return c.backends.recognizer; }),
      string_setting("additional_recognizer",
                     [](auto& c) -> auto& { return c.backends.additional_recognizer; }),
      string_setting("sequence_scorer",
                     [](auto& c) -> auto& { return c.backends.sequence_scorer; }),
  };
  return table;
}

}  // namespace

void validate(const PipelineConfig& c) {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) fail(ErrorKind::Config, msg);
  };
  check(c.worker_count >= 1, "worker_count must be >= 1");
  check(c.stretch_up >= 1 && c.stretch_down >= 1, "stretch factors must be >= 1");
  check(c.uniform_chunk_s > 0.0, "uniform_chunk_s must be positive");
  const auto& s = c.segmentation;
  check(s.onset >= 0.0 && s.onset <= 1.0 && s.offset >= 0.0 && s.offset <= 1.0,
        "onset and offset must lie in [0, 1]");
  check(s.offset <= s.onset, "offset must not exceed onset");
  check(s.min_on_s >= 0.0 && s.min_off_s >= 0.0, "min_on_s and min_off_s must be >= 0");
  check(s.max_chunk_s > 0.0, "max_chunk_s must be positive");
  check(s.merge_gap_s >= 0.0, "merge_gap_s must be >= 0");
  check(c.speech_threshold >= 0.0 && c.speech_threshold <= 1.0, "speech_threshold must lie in [0, 1]");
  check(c.refine_pair_threshold >= 0.0 && c.refine_pair_threshold <= 1.0,
        "refine_pair_threshold must lie in [0, 1]");
  check(c.lm.group_max >= 1 && c.lm.group_max <= 16, "lm_group_max must lie in [1, 16]");
  if (c.uncertainty == UncertaintyMode::Ensemble) {
    check(!c.ensemble_members.empty(), "ensemble_members is empty");
  }
}

void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value) {
  for (const auto& s : settings()) {
    if (s.key == key) {
      s.set(config, key, trim(value));
      return;
    }
  }
  fail(ErrorKind::Config, "unknown setting '" + std::string(key) + "'");
}

void apply_config_text(PipelineConfig& config, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::FileNotFound, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    apply_config_text(config, ss.str());
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

EnvLookup process_env() {
  return [](const char* name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name)) return std::string(v);
    return std::nullopt;
  };
}

void apply_env_overrides(PipelineConfig& config, const EnvLookup& env) {
  const std::pair<const char*, std::string BackendSpecs::*> vars[] = {
      {"LONGSCRIBE_FRAME_CLASSIFIER", &BackendSpecs::frame_classifier},
      {"LONGSCRIBE_SEGMENT_CLASSIFIER", &BackendSpecs::segment_classifier},
      {"LONGSCRIBE_RECOGNIZER", &BackendSpecs::recognizer},
      {"LONGSCRIBE_ADDITIONAL_RECOGNIZER", &BackendSpecs::additional_recognizer},
      {"LONGSCRIBE_SEQUENCE_SCORER", &BackendSpecs::sequence_scorer},
  };
  for (const auto& [name, member] : vars) {
    if (auto v = env(name)) config.backends.*member = *v;
  }
}

std::string to_config_text(const PipelineConfig& config) {
  std::string out;
  for (const auto& s : settings()) {
    out += std::string(s.key) + " = " + s.get(config) + "\n";
  }
  return out;
}

nlohmann::ordered_json to_json(const PipelineConfig& config) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& s : settings()) j[std::string(s.key)] = s.get(config);
  return j;
}

}  // namespace longscribe
