#include "longscribe/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "longscribe/audio.hpp"
#include "longscribe/error.hpp"
#include "longscribe/text.hpp"

namespace longscribe {

namespace fs = std::filesystem;

namespace {

std::string read_text_file(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::FileNotFound, std::string(what) + " not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

EvalManifest parse_eval_manifest(const nlohmann::json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) fail(ErrorKind::Config, "evaluation manifest must be a JSON object");
  EvalManifest m;
  try {
    if (auto it = doc.find("items"); it != doc.end()) {
      for (const auto& item : *it) {
        EvalItem e;
        e.audio = resolve(base_dir, item.at("audio").get<std::string>());
        if (item.contains("reference_text")) {
          e.reference = split_words(item["reference_text"].get<std::string>());
        } else if (item.contains("reference")) {
          e.reference = split_words(
              read_text_file(resolve(base_dir, item["reference"].get<std::string>()), "reference"));
        } else {
          fail(ErrorKind::FileNotFound, "no reference for " + e.audio.string());
        }
        if (item.contains("recognizer")) e.recognizer = item["recognizer"].get<std::string>();
        if (item.contains("additional_recognizer")) {
          e.additional_recognizer = item["additional_recognizer"].get<std::string>();
        }
        m.items.push_back(std::move(e));
      }
    }
    if (doc.contains("audio_dir")) {
      const fs::path audio_dir = resolve(base_dir, doc["audio_dir"].get<std::string>());
      const fs::path ref_dir =
          doc.contains("reference_dir") ? resolve(base_dir, doc["reference_dir"].get<std::string>())
                                        : audio_dir;
      std::vector<fs::path> wavs;
      for (const auto& entry : fs::directory_iterator(audio_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".wav") wavs.push_back(entry.path());
      }
      std::sort(wavs.begin(), wavs.end());
      for (const auto& wav : wavs) {
        const fs::path ref = ref_dir / (wav.stem().string() + ".txt");
        m.items.push_back({wav, split_words(read_text_file(ref, "reference")), std::nullopt, std::nullopt});
      }
    }
    if (auto it = doc.find("noise"); it != doc.end()) {
      m.noise = resolve(base_dir, it->at("path").get<std::string>());
      if (it->contains("snr_db")) m.snr_db = (*it)["snr_db"].get<double>();
    }
    if (auto it = doc.find("thresholds"); it != doc.end()) {
      m.thresholds = it->get<std::vector<double>>();
      if (!std::is_sorted(m.thresholds.begin(), m.thresholds.end())) {
        fail(ErrorKind::Config, "thresholds must be ascending");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("evaluation manifest: ") + e.what());
  }
  if (m.items.empty()) fail(ErrorKind::Config, "evaluation manifest lists no audio");
  return m;
}

EvalManifest load_eval_manifest(const fs::path& path) {
  const std::string text = read_text_file(path, "evaluation manifest");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return parse_eval_manifest(doc, path.parent_path());
}

TimingSummary summarize_timing(std::vector<double> seconds) {
  TimingSummary s;
  if (seconds.empty()) return s;
  std::sort(seconds.begin(), seconds.end());
  const std::size_t n = seconds.size();
  s.max_s = seconds.back();
  s.mean_s = std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(n);
  s.median_s = n % 2 ? seconds[n / 2] : (seconds[n / 2 - 1] + seconds[n / 2]) / 2.0;
  return s;
}

EvaluationResult evaluate(const EvalManifest& manifest, const PipelineConfig& config) {
  validate(config);
  EvaluationResult result;
  std::optional<AudioBuffer> noise;
  if (manifest.noise) noise = to_internal_rate(read_wav(*manifest.noise));

  std::optional<Backends> shared;
  std::vector<double> totals;
  for (const EvalItem& item : manifest.items) {
    BackendSpecs specs = config.backends;
    const bool custom = item.recognizer || item.additional_recognizer;
    if (item.recognizer) specs.recognizer = *item.recognizer;
    if (item.additional_recognizer) specs.additional_recognizer = *item.additional_recognizer;
    if (!custom && !shared) shared = make_backends(specs, config.worker_count);
    const Backends backends = custom ? make_backends(specs, config.worker_count) : *shared;

    FileEvaluation fe;
    fe.audio = item.audio.string();
    PipelineResult run;
    if (noise) {
      const AudioBuffer clean = to_internal_rate(read_wav(item.audio));
      const NoiseMix mix = mix_noise_detailed(clean, *noise, manifest.snr_db);
      fe.achieved_snr_db = mix.achieved_snr_db;
      run = run_pipeline(mix.mixed, config, backends);
    } else {
      run = run_pipeline(item.audio, config, backends);
    }
    const auto hyp = run.transcription.texts();
    fe.report = evaluate_words(item.reference, hyp);
    std::vector<bool> incorrect(fe.report.per_word_correct.size());
    for (std::size_t i = 0; i < incorrect.size(); ++i) incorrect[i] = !fe.report.per_word_correct[i];
    if (run.mask) fe.uncertainty = uncertainty_report(*run.mask, incorrect);
    if (!manifest.thresholds.empty()) fe.sweep = score_sweep(run.transcription, incorrect, manifest.thresholds);
    fe.timing = run.timing;
    totals.push_back(run.timing.total_s);
    result.files.push_back(std::move(fe));
  }

  const double n = static_cast<double>(result.files.size());
  for (const auto& f : result.files) result.mean_wer += f.report.wer / n;
  if (result.files.front().uncertainty) {
    UncertaintyPoint mean;
    for (const auto& f : result.files) {
      mean.uncertainty_ratio += f.uncertainty->uncertainty_ratio / n;
      mean.error_recall += f.uncertainty->error_recall / n;
    }
    result.mean_uncertainty = mean;
  }
  for (std::size_t t = 0; t < manifest.thresholds.size(); ++t) {
    UncertaintyPoint mean;
    mean.threshold = manifest.thresholds[t];
    for (const auto& f : result.files) {
      mean.uncertainty_ratio += f.sweep[t].uncertainty_ratio / n;
      mean.error_recall += f.sweep[t].error_recall / n;
    }
    result.mean_sweep.push_back(mean);
  }
  result.timing = summarize_timing(totals);
  return result;
}

namespace {
nlohmann::ordered_json point_json(const UncertaintyPoint& p) {
  nlohmann::ordered_json j;
  if (p.threshold) j["threshold"] = *p.threshold;
  j["uncertainty_ratio"] = p.uncertainty_ratio;
  j["error_recall"] = p.error_recall;
  return j;
}
}  // namespace

nlohmann::ordered_json to_json(const EvaluationResult& result) {
  using ojson = nlohmann::ordered_json;
  ojson files = ojson::array();
  for (const auto& f : result.files) {
    ojson j;
    j["audio"] = f.audio;
    j["wer"] = f.report.wer;
    j["n_ref_words"] = f.report.n_ref_words;
    j["n_hyp_words"] = f.report.n_hyp_words;
    j["substitutions"] = f.report.substitutions;
    j["deletions"] = f.report.deletions;
    j["insertions"] = f.report.insertions;
    j["missed_ref_words"] = f.report.missed_ref_words;
    j["per_word_correct"] = f.report.per_word_correct;
    if (f.uncertainty) j["uncertainty"] = point_json(*f.uncertainty);
    if (!f.sweep.empty()) {
      j["sweep"] = ojson::array();
      for (const auto& p : f.sweep) j["sweep"].push_back(point_json(p));
    }
    if (f.achieved_snr_db) j["achieved_snr_db"] = *f.achieved_snr_db;
    j["timing"] = f.timing.to_json();
    files.push_back(std::move(j));
  }
  ojson agg;
  agg["files"] = result.files.size();
  agg["mean_wer"] = result.mean_wer;
  if (result.mean_uncertainty) agg["uncertainty"] = point_json(*result.mean_uncertainty);
  if (!result.mean_sweep.empty()) {
    agg["sweep"] = ojson::array();
    for (const auto& p : result.mean_sweep) agg["sweep"].push_back(point_json(p));
  }
  ojson doc;
  doc["files"] = std::move(files);
  doc["aggregate"] = std::move(agg);
  doc["timing"] = {{"max_s", result.timing.max_s},
                   {"mean_s", result.timing.mean_s},
                   {"median_s", result.timing.median_s}};
  return doc;
}

std::string files_to_csv(const EvaluationResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "audio,wer,n_ref_words,n_hyp_words,missed_ref_words,uncertainty_ratio,error_recall,total_s\n";
  for (const auto& f : result.files) {
    out << '"' << f.audio << "\"," << f.report.wer << ',' << f.report.n_ref_words << ','
        << f.report.n_hyp_words << ',' << f.report.missed_ref_words << ',';
    if (f.uncertainty) out << f.uncertainty->uncertainty_ratio << ',' << f.uncertainty->error_recall;
    else out << ',';
    out << ',' << f.timing.total_s << '\n';
  }
  return out.str();
}

}  // namespace longscribe
