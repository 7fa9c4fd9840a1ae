#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "longscribe/config.hpp"
#include "longscribe/pipeline.hpp"
#include "longscribe/recognition.hpp"
#include "longscribe/uncertainty.hpp"

namespace longscribe {

enum class OutputFormat { Text, Json, Html };
std::string_view to_string(OutputFormat format);
std::optional<OutputFormat> parse_output_format(std::string_view name);

// Words joined by single spaces, newline-terminated.
std::string render_text(const Transcription& transcription);

// {"words": [{"text", "start_s"?, "end_s"?, "score", "uncertain"?}],
//  "uncertainty"?: {"method", "uncertain_count"}, "config"?: {...}, "timing"?: {...}}
// Keys are emitted in this order. The mask, when given, must match the word count.
nlohmann::ordered_json transcript_json(const Transcription& transcription,
                                       const UncertaintyMask* mask = nullptr,
                                       const PipelineConfig* config = nullptr,
                                       const TimingReport* timing = nullptr);
std::string render_json(const Transcription& transcription, const UncertaintyMask* mask = nullptr,
                        const PipelineConfig* config = nullptr, const TimingReport* timing = nullptr);

// Uncertain words are wrapped in <mark>; all text is HTML-escaped.
std::string render_html(const Transcription& transcription, const UncertaintyMask* mask = nullptr);
std::string html_escape(std::string_view text);

struct ParsedTranscript {
  std::vector<std::string> words;
  std::optional<std::vector<bool>> uncertain;
};
// Reads back the word list and flags of a render_json document.
ParsedTranscript parse_transcript_json(std::string_view json);

void write_file(const std::filesystem::path& path, std::string_view contents);

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  const PipelineConfig* config = nullptr;
  nlohmann::ordered_json timing;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};
nlohmann::ordered_json manifest_json(const RunManifest& manifest);

}  // namespace longscribe
