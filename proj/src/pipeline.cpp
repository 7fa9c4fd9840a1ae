#include "longscribe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "longscribe/adapter_protocol.hpp"
#include "longscribe/alignment.hpp"
#include "longscribe/error.hpp"
#include "longscribe/filtering.hpp"
#include "longscribe/mock_backends.hpp"

namespace longscribe {

namespace {

bool starts_with(const std::string& s, std::string_view prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

class PoolRegistry {
 public:
  explicit PoolRegistry(std::size_t workers) : workers_(workers) {}
  std::shared_ptr<adapter::AdapterPool> get(const std::string& command) {
    auto& pool = pools_[command];
    if (!pool) pool = std::make_shared<adapter::AdapterPool>(command, workers_);
    return pool;
  }

 private:
  std::size_t workers_;
  std::map<std::string, std::shared_ptr<adapter::AdapterPool>> pools_;
};

[[noreturn]] void unknown_spec(const char* role, const std::string& spec) {
  fail(ErrorKind::Config, std::string(role) + ": unknown backend spec '" + spec + "'");
}

std::shared_ptr<Recognizer> make_recognizer(const std::string& spec, mock::ScriptRole role,
                                            PoolRegistry& pools, const char* what) {
  if (starts_with(spec, "script:")) {
    return std::make_shared<mock::ScriptedRecognizer>(
        mock::load_recognition_script(spec.substr(7)), role);
  }
  if (starts_with(spec, "cmd:")) {
    return std::make_shared<adapter::SubprocessRecognizer>(pools.get(spec.substr(4)));
  }
  unknown_spec(what, spec);
}

}  // namespace

Backends make_backends(const BackendSpecs& specs, std::size_t worker_count) {
  PoolRegistry pools(std::max<std::size_t>(1, worker_count));
  Backends b;

  if (specs.frame_classifier == "energy") {
    b.frame_classifier = std::make_shared<mock::EnergyFrameClassifier>();
  } else if (starts_with(specs.frame_classifier, "cmd:")) {
    b.frame_classifier = std::make_shared<adapter::SubprocessFrameClassifier>(
        pools.get(specs.frame_classifier.substr(4)));
  } else {
    unknown_spec("frame_classifier", specs.frame_classifier);
  }

  if (specs.segment_classifier == "energy") {
    b.segment_classifier = std::make_shared<mock::EnergySegmentClassifier>();
  } else if (specs.segment_classifier == "accept") {
    b.segment_classifier = std::make_shared<mock::ScriptedSegmentClassifier>(std::vector<LabelScores>{});
  } else if (starts_with(specs.segment_classifier, "cmd:")) {
    b.segment_classifier = std::make_shared<adapter::SubprocessSegmentClassifier>(
        pools.get(specs.segment_classifier.substr(4)));
  } else {
    unknown_spec("segment_classifier", specs.segment_classifier);
  }

  if (specs.recognizer.empty()) fail(ErrorKind::Config, "no recognizer configured");
  b.recognizer = make_recognizer(specs.recognizer, mock::ScriptRole::Base, pools, "recognizer");
  if (!specs.additional_recognizer.empty()) {
    b.additional_recognizer = make_recognizer(specs.additional_recognizer,
                                              mock::ScriptRole::Additional, pools,
                                              "additional_recognizer");
  }

  const auto& lm = specs.sequence_scorer;
  if (lm.empty()) {
  } else if (lm == "constant") {
    b.sequence_scorer = std::make_shared<mock::ConstantScorer>();
  } else if (starts_with(lm, "unigram:")) {
    b.sequence_scorer = std::make_shared<mock::UnigramScorer>(mock::load_unigram_scorer(lm.substr(8)));
  } else if (starts_with(lm, "cmd:")) {
    b.sequence_scorer = std::make_shared<adapter::SubprocessSequenceScorer>(pools.get(lm.substr(4)));
  } else {
    unknown_spec("sequence_scorer", lm);
  }

  b.frame_classifier = guard(b.frame_classifier);
  b.segment_classifier = guard(b.segment_classifier);
  b.recognizer = guard(b.recognizer);
  if (b.additional_recognizer) b.additional_recognizer = guard(b.additional_recognizer);
  if (b.sequence_scorer) b.sequence_scorer = guard(b.sequence_scorer);
  return b;
}

double TimingReport::max_stage_s() const {
  double m = 0.0;
  for (const auto& s : stages) m = std::max(m, s.seconds);
  return m;
}

nlohmann::ordered_json TimingReport::to_json() const {
  nlohmann::ordered_json stages_json = nlohmann::ordered_json::object();
  for (const auto& s : stages) stages_json[s.stage] = s.seconds;
  return {{"stages", stages_json}, {"total_s", total_s}};
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = n;

  auto work = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        stop.store(true);
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
auto run_stage(TimingReport& timing, const char* stage, F&& body) {
  const auto t0 = Clock::now();
  auto record = [&] {
    timing.stages.push_back({stage, std::chrono::duration<double>(Clock::now() - t0).count()});
  };
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      record();
    } else {
      auto out = body();
      record();
      return out;
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.kind(), e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, ErrorKind::Backend, e.what());
  }
}

bool mode_used(const PipelineConfig& c, UncertaintyMode m) {
  if (c.uncertainty == m) return true;
  return c.uncertainty == UncertaintyMode::Ensemble &&
         std::find(c.ensemble_members.begin(), c.ensemble_members.end(), m) !=
             c.ensemble_members.end();
}

// Aligns each chunk's base words against the matching chunk of `others` and
// stitches the per-chunk scripts into one script over the full transcript.
template <typename PerChunk>
EditScript stitched_script(const std::vector<Transcription>& base,
                           const std::vector<Transcription>& others, PerChunk&& per_chunk) {
  EditScript total;
  std::size_t base_off = 0;
  std::size_t other_off = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto b = base[i].texts();
    const auto o = others[i].texts();
    append_script(total, per_chunk(b, o), base_off, other_off);
    base_off += b.size();
    other_off += o.size();
  }
  return total;
}

}  // namespace

PipelineResult run_pipeline(const AudioBuffer& input, const PipelineConfig& config,
                            const Backends& backends) {
  try {
    validate(config);
    if (!backends.recognizer) fail(ErrorKind::Config, "no recognizer configured");
    if (mode_used(config, UncertaintyMode::Disagreement) && !backends.additional_recognizer) {
      fail(ErrorKind::Config, "disagreement uncertainty needs an additional recognizer");
    }
  } catch (const Error& e) {
    throw StageError("config", e.kind(), e.what());
  }
  const auto t_start = Clock::now();
  PipelineResult result;
  TimingReport& timing = result.timing;

  const AudioBuffer audio =
      run_stage(timing, "resample", [&] { return to_internal_rate(input); });
  result.duration_s = audio.duration_s();

  std::vector<Chunk> chunks = run_stage(timing, "segmentation", [&] {
    if (audio.empty()) return std::vector<Chunk>{};
    if (config.chunking == Chunking::Uniform) {
      return uniform_chunks(audio.duration_s(), config.uniform_chunk_s);
    }
    require(backends.frame_classifier != nullptr, "no frame classifier");
    return smart_chunks(frame_probs(audio, *backends.frame_classifier), config.segmentation);
  });

  if (config.ast_filter && !chunks.empty()) {
    run_stage(timing, "filter", [&] {
      require(backends.segment_classifier != nullptr, "no segment classifier");
      const auto& labels =
          config.speech_labels.empty() ? default_speech_labels() : config.speech_labels;
      auto filtered = filter_chunks(chunks, audio, *backends.segment_classifier, labels,
                                    config.speech_threshold);
      chunks = std::move(filtered.kept);
      result.rejected_chunks = std::move(filtered.rejected);
    });
  }
  result.chunks = chunks;

  const bool want_additional = mode_used(config, UncertaintyMode::Disagreement);
  const bool want_tta = mode_used(config, UncertaintyMode::Tta);
  std::vector<Transcription> additional(chunks.size());
  std::vector<Transcription> stretched(chunks.size());

  run_stage(timing, "recognition", [&] {
    AudioBuffer stretched_audio;
    const double scale = static_cast<double>(config.stretch_up) / config.stretch_down;
    if (want_tta && !chunks.empty()) {
      stretched_audio = stretch(audio, config.stretch_up, config.stretch_down);
    }
    result.chunk_transcripts.assign(chunks.size(), {});
    // Task t covers chunk t / kinds; kind 0 = base, 1 = additional, 2 = stretched.
    const std::size_t kinds = 3;
    parallel_for(chunks.size() * kinds, static_cast<std::size_t>(config.worker_count),
                 [&](std::size_t t) {
                   const std::size_t i = t / kinds;
                   const Chunk& chunk = chunks[i];
                   switch (t % kinds) {
                     case 0:
                       result.chunk_transcripts[i] =
                           recognize(audio, chunk, *backends.recognizer, config.reduction, i);
                       break;
                     case 1:
                       if (want_additional) {
                         additional[i] = recognize(audio, chunk, *backends.additional_recognizer,
                                                   config.reduction, i);
                       }
                       break;
                     default:
                       if (want_tta) {
                         const Chunk scaled{chunk.start_s * scale,
                                            std::min(chunk.end_s * scale, stretched_audio.duration_s()),
                                            chunk.source_segment_ids};
                         stretched[i] = recognize(stretched_audio, scaled, *backends.recognizer,
                                                  config.reduction, i, scale);
                       }
                   }
                 });
    result.transcription = concatenate(result.chunk_transcripts);
  });

  if (config.uncertainty != UncertaintyMode::None) {
    result.mask = run_stage(timing, "uncertainty", [&] {
      const auto& base = result.chunk_transcripts;
      const std::size_t n_words = result.transcription.words.size();
      auto member_mask = [&](UncertaintyMode m) -> UncertaintyMask {
        if (m == UncertaintyMode::Scores) {
          return mask_from_scores(result.transcription, config.score_threshold);
        }
        DisagreementOptions opts{config.flag_deletes};
        if (m == UncertaintyMode::Disagreement) {
          const EditScript script = stitched_script(base, additional, [&](const auto& b, const auto& o) {
            EditScript s = refine(align(b, o), b, o, config.refine_pair_threshold);
            s = drop_script_mismatch_diffs(s, b, o);
            if (backends.sequence_scorer) s = lm_validate(s, b, o, *backends.sequence_scorer, config.lm);
            return s;
          });
          return mask_from_disagreement(script, n_words, opts).mask;
        }
        const EditScript script = stitched_script(base, stretched, [&](const auto& b, const auto& o) {
          EditScript s = align(b, o);
          return config.tta_refine ? refine(s, b, o, config.refine_pair_threshold) : s;
        });
        UncertaintyMask mask = mask_from_disagreement(script, n_words, opts).mask;
        mask.method = UncertaintyMethod::Tta;
        return mask;
      };
      if (config.uncertainty != UncertaintyMode::Ensemble) return member_mask(config.uncertainty);
      std::vector<UncertaintyMask> masks;
      for (auto m : config.ensemble_members) masks.push_back(member_mask(m));
      return ensemble_masks(masks);
    });
  }

  timing.total_s = std::chrono::duration<double>(Clock::now() - t_start).count();
  return result;
}

PipelineResult run_pipeline(const std::filesystem::path& audio_path, const PipelineConfig& config,
                            const Backends& backends) {
  TimingReport read_timing;
  const auto t0 = Clock::now();
  AudioBuffer audio = run_stage(read_timing, "read", [&] { return read_wav(audio_path); });
  PipelineResult result = run_pipeline(audio, config, backends);
  result.timing.stages.insert(result.timing.stages.begin(), read_timing.stages.front());
  result.timing.total_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

}  // namespace longscribe
