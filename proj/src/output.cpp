#include "longscribe/output.hpp"

#include <fstream>

#include "longscribe/error.hpp"

namespace longscribe {

using ojson = nlohmann::ordered_json;

std::string_view to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Text: return "text";
    case OutputFormat::Json: return "json";
    case OutputFormat::Html: return "html";
  }
  return "text";
}

std::optional<OutputFormat> parse_output_format(std::string_view name) {
  for (auto f : {OutputFormat::Text, OutputFormat::Json, OutputFormat::Html}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

namespace {
void check_mask(const Transcription& t, const UncertaintyMask* mask) {
  if (mask && mask->size() != t.words.size()) {
    fail(ErrorKind::InvalidArgument, "uncertainty mask has " + std::to_string(mask->size()) +
                                         " flags for " + std::to_string(t.words.size()) + " words");
  }
}
}  // namespace

std::string render_text(const Transcription& transcription) { return transcription.text() + "\n"; }

ojson transcript_json(const Transcription& transcription, const UncertaintyMask* mask,
                      const PipelineConfig* config, const TimingReport* timing) {
  check_mask(transcription, mask);
  ojson words = ojson::array();
  for (std::size_t i = 0; i < transcription.words.size(); ++i) {
    const Word& w = transcription.words[i];
    ojson o;
    o["text"] = w.text;
    if (w.start_s) o["start_s"] = *w.start_s;
    if (w.end_s) o["end_s"] = *w.end_s;
    o["score"] = w.score;
    if (mask) o["uncertain"] = static_cast<bool>(mask->flags[i]);
    words.push_back(std::move(o));
  }
  ojson doc;
  doc["words"] = std::move(words);
  if (mask) {
    doc["uncertainty"] = {{"method", to_string(mask->method)},
                          {"uncertain_count", mask->uncertain_count()}};
  }
  if (config) doc["config"] = to_json(*config);
  if (timing) doc["timing"] = timing->to_json();
  return doc;
}

std::string render_json(const Transcription& transcription, const UncertaintyMask* mask,
                        const PipelineConfig* config, const TimingReport* timing) {
  return transcript_json(transcription, mask, config, timing).dump(2) + "\n";
}

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_html(const Transcription& transcription, const UncertaintyMask* mask) {
  check_mask(transcription, mask);
  std::string body;
  for (std::size_t i = 0; i < transcription.words.size(); ++i) {
    if (i) body += ' ';
    const std::string word = html_escape(transcription.words[i].text);
    body += mask && mask->flags[i] ? "<mark>" + word + "</mark>" : word;
  }
  return "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Transcript</title>\n"
         "<style>mark { background: #ffd54f; }</style>\n</head>\n<body>\n<p>" +
         body + "</p>\n</body>\n</html>\n";
}

ParsedTranscript parse_transcript_json(std::string_view text) {
  ParsedTranscript out;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::InvalidArgument, std::string("transcript JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("words") || !doc["words"].is_array()) {
    fail(ErrorKind::InvalidArgument, "transcript JSON has no 'words' array");
  }
  const bool has_mask = doc.contains("uncertainty");
  if (has_mask) out.uncertain.emplace();
  for (const auto& w : doc["words"]) {
    out.words.push_back(w.at("text").get<std::string>());
    if (has_mask) out.uncertain->push_back(w.at("uncertain").get<bool>());
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

ojson manifest_json(const RunManifest& m) {
  ojson doc;
  doc["tool"] = "longscribe";
  doc["version"] = version();
  doc["compiler"] = __VERSION__;
  doc["command"] = m.command;
  doc["inputs"] = m.inputs;
  doc["outputs"] = m.outputs;
  if (m.config) doc["config"] = to_json(*m.config);
  doc["timing"] = m.timing;
  for (const auto& [k, v] : m.extra.items()) doc[k] = v;
  return doc;
}

}  // namespace longscribe
