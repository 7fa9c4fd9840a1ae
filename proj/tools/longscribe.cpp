#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "longscribe/adapter_protocol.hpp"
#include "longscribe/config.hpp"
#include "longscribe/error.hpp"
#include "longscribe/evaluation.hpp"
#include "longscribe/output.hpp"
#include "longscribe/pipeline.hpp"

namespace fs = std::filesystem;
using namespace longscribe;

namespace {

// Flags shared by transcribe and evaluate. Unset options leave the config alone.
struct CommonFlags {
  std::optional<std::string> config_file;
  std::optional<std::string> chunking;
  bool no_ast = false;
  std::optional<std::string> uncertainty;
  std::optional<double> score_threshold;
  std::optional<int> workers;
  std::optional<std::string> frame_classifier;
  std::optional<std::string> segment_classifier;
  std::optional<std::string> recognizer;
  std::optional<std::string> additional_recognizer;
  std::optional<std::string> sequence_scorer;
  std::vector<std::string> settings;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_file, "key = value config file");
    app.add_option("--chunking", chunking, "smart or uniform")->check(CLI::IsMember({"smart", "uniform"}));
    app.add_flag("--no-ast", no_ast, "skip the segment classifier filter");
    app.add_option("--uncertainty", uncertainty, "none, scores, disagreement, tta or ensemble")
        ->check(CLI::IsMember({"none", "scores", "disagreement", "tta", "ensemble"}));
    app.add_option("--score-threshold", score_threshold, "words scoring below are uncertain");
    app.add_option("--workers", workers, "recognition worker threads")->check(CLI::PositiveNumber);
    app.add_option("--frame-classifier", frame_classifier, "energy | cmd:<command>");
    app.add_option("--segment-classifier", segment_classifier, "energy | accept | cmd:<command>");
    app.add_option("--recognizer", recognizer, "script:<path> | cmd:<command>");
    app.add_option("--additional-recognizer", additional_recognizer, "script:<path> | cmd:<command>");
    app.add_option("--sequence-scorer", sequence_scorer, "constant | unigram:<path> | cmd:<command>");
    app.add_option("--set", settings, "override any config key (key=value)");
  }

  PipelineConfig resolve() const {
    PipelineConfig c;
    if (config_file) apply_config_file(c, *config_file);
    apply_env_overrides(c);
    for (const auto& kv : settings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) fail(ErrorKind::Config, "--set expects key=value, got '" + kv + "'");
      apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (chunking) apply_setting(c, "chunking", *chunking);
    if (no_ast) c.ast_filter = false;
    if (uncertainty) apply_setting(c, "uncertainty", *uncertainty);
    if (score_threshold) c.score_threshold = *score_threshold;
    if (workers) c.worker_count = *workers;
    if (frame_classifier) c.backends.frame_classifier = *frame_classifier;
    if (segment_classifier) c.backends.segment_classifier = *segment_classifier;
    if (recognizer) c.backends.recognizer = *recognizer;
    if (additional_recognizer) c.backends.additional_recognizer = *additional_recognizer;
    if (sequence_scorer) c.backends.sequence_scorer = *sequence_scorer;
    validate(c);
    return c;
  }
};

void emit(const std::optional<std::string>& path, const std::string& contents) {
  if (path) write_file(*path, contents);
  else std::cout << contents << std::flush;
}

int transcribe(const std::string& audio, const CommonFlags& flags, const std::string& format_name,
               const std::optional<std::string>& output, std::optional<std::string> manifest_path,
               bool emit_timing) {
  const PipelineConfig config = flags.resolve();
  const Backends backends = make_backends(config.backends, config.worker_count);
  const PipelineResult result = run_pipeline(fs::path(audio), config, backends);

  const OutputFormat format = *parse_output_format(format_name);
  const UncertaintyMask* mask = result.mask ? &*result.mask : nullptr;
  std::string rendered;
  switch (format) {
    case OutputFormat::Text: rendered = render_text(result.transcription); break;
    case OutputFormat::Json:
      rendered = render_json(result.transcription, mask, &config, emit_timing ? &result.timing : nullptr);
      break;
    case OutputFormat::Html: rendered = render_html(result.transcription, mask); break;
  }
  emit(output, rendered);

  if (!manifest_path) {
    manifest_path = output ? *output + ".manifest.json"
                           : fs::path(audio).stem().string() + ".manifest.json";
  }
  RunManifest m;
  m.command = "transcribe";
  m.inputs = {audio};
  if (output) m.outputs = {*output};
  m.config = &config;
  m.timing = result.timing.to_json();
  m.extra["format"] = format_name;
  m.extra["duration_s"] = result.duration_s;
  m.extra["chunks"] = {{"recognized", result.chunks.size()}, {"rejected", result.rejected_chunks.size()}};
  m.extra["words"] = result.transcription.words.size();
  if (mask) m.extra["uncertain_words"] = mask->uncertain_count();
  write_file(*manifest_path, manifest_json(m).dump(2) + "\n");
  return 0;
}

int evaluate_cmd(const std::string& manifest_file, const CommonFlags& flags,
                 const std::optional<std::string>& output, const std::optional<std::string>& csv,
                 std::optional<std::string> manifest_path) {
  const PipelineConfig config = flags.resolve();
  const EvalManifest manifest = load_eval_manifest(manifest_file);
  const EvaluationResult result = evaluate(manifest, config);
  emit(output, to_json(result).dump(2) + "\n");
  if (csv) write_file(*csv, files_to_csv(result));

  if (!manifest_path) {
    manifest_path = output ? *output + ".manifest.json"
                           : fs::path(manifest_file).stem().string() + ".run.json";
  }
  RunManifest m;
  m.command = "evaluate";
  m.inputs = {manifest_file};
  if (output) m.outputs.push_back(*output);
  if (csv) m.outputs.push_back(*csv);
  m.config = &config;
  m.timing = {{"max_s", result.timing.max_s},
              {"mean_s", result.timing.mean_s},
              {"median_s", result.timing.median_s}};
  m.extra["files"] = result.files.size();
  m.extra["mean_wer"] = result.mean_wer;
  write_file(*manifest_path, manifest_json(m).dump(2) + "\n");
  return 0;
}

int conformance(const std::string& command, const std::vector<std::string>& ops) {
  adapter::ConformanceOptions options;
  if (!ops.empty()) options.ops = {ops.begin(), ops.end()};
  const auto report = adapter::run_conformance(command, options);
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  }
  std::cout << (report.passed() ? "adapter conforms\n" : "adapter does not conform\n");
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-form speech transcription with uncertainty highlighting"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  auto* tr = app.add_subcommand("transcribe", "transcribe one WAV file");
  std::string audio;
  CommonFlags tr_flags;
  std::string format = "text";
  std::optional<std::string> tr_output, tr_manifest;
  bool emit_timing = false;
  tr->add_option("audio", audio, "16-bit PCM WAV file")->required();
  tr_flags.add_to(*tr);
  tr->add_option("--format", format, "text, json or html")->check(CLI::IsMember({"text", "json", "html"}));
  tr->add_option("-o,--output", tr_output, "output file (default: stdout)");
  tr->add_option("--manifest", tr_manifest, "run manifest path (default: next to the output)");
  tr->add_flag("--emit-timing", emit_timing, "include wall-clock timing in JSON output");

  auto* ev = app.add_subcommand("evaluate", "evaluate against reference transcripts");
  std::string eval_manifest;
  CommonFlags ev_flags;
  std::optional<std::string> ev_output, ev_csv, ev_manifest;
  ev->add_option("manifest_file", eval_manifest, "evaluation manifest (JSON)")->required();
  ev_flags.add_to(*ev);
  ev->add_option("-o,--output", ev_output, "JSON report file (default: stdout)");
  ev->add_option("--csv", ev_csv, "per-file CSV report");
  ev->add_option("--manifest", ev_manifest, "run manifest path");

  auto* cf = app.add_subcommand("conformance", "check an adapter against the wire protocol");
  std::string command;
  std::vector<std::string> ops;
  cf->add_option("command", command, "shell command that starts the adapter")->required();
  cf->add_option("--ops", ops, "ops the adapter serves (default: all)")
      ->check(CLI::IsMember({"classify_frames", "classify_segment", "recognize", "score_sequence"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tr) return transcribe(audio, tr_flags, format, tr_output, tr_manifest, emit_timing);
    if (*ev) return evaluate_cmd(eval_manifest, ev_flags, ev_output, ev_csv, ev_manifest);
    if (*cf) return conformance(command, ops);
  } catch (const StageError& e) {
    std::cerr << "longscribe: stage " << e.stage() << " failed (" << to_string(e.kind())
              << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::Config ? 2 : 1;
  } catch (const Error& e) {
    std::cerr << "longscribe: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "longscribe: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
