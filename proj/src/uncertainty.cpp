#include "longscribe/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "longscribe/error.hpp"

namespace longscribe {

std::string_view to_string(UncertaintyMethod method) {
  switch (method) {
    case UncertaintyMethod::ScoreThreshold: return "score_threshold";
    case UncertaintyMethod::Disagreement: return "disagreement";
    case UncertaintyMethod::Tta: return "tta";
    case UncertaintyMethod::Ensemble: return "ensemble";
  }
  return "score_threshold";
}

std::size_t UncertaintyMask::uncertain_count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

UncertaintyMask mask_from_scores(const Transcription& transcription, double threshold) {
  UncertaintyMask mask;
  mask.method = UncertaintyMethod::ScoreThreshold;
  mask.flags.reserve(transcription.words.size());
  for (std::size_t i = 0; i < transcription.words.size(); ++i) {
    const double score = transcription.words[i].score;
    require(std::isfinite(score), "word " + std::to_string(i) + " has a non-finite score");
    mask.flags.push_back(score < threshold);
  }
  return mask;
}

DisagreementMask mask_from_disagreement(const EditScript& script, std::size_t base_len,
                                        const DisagreementOptions& options) {
  DisagreementMask result;
  result.mask.method = UncertaintyMethod::Disagreement;
  result.mask.flags.assign(base_len, false);
  std::size_t covered = 0;
  for (const DiffOp& op : script.ops) {
    require(op.base.begin == covered && op.base.end <= base_len,
            "edit script does not match a base of " + std::to_string(base_len) + " words");
    covered = op.base.end;
    if (!op.is_difference()) continue;
    if (op.kind == DiffKind::Insert) {
      result.unflaggable_inserts += op.other.size();
      continue;
    }
    if (op.kind == DiffKind::Delete && !options.flag_deletes) continue;
    for (std::size_t k = op.base.begin; k < op.base.end; ++k) result.mask.flags[k] = true;
  }
  require(covered == base_len,
          "edit script covers " + std::to_string(covered) + " of " + std::to_string(base_len) +
              " base words");
  return result;
}

UncertaintyMask mask_from_tta(const Transcription& base, const Transcription& stretched,
                              const TtaOptions& options) {
  const auto base_words = base.texts();
  const auto other_words = stretched.texts();
  EditScript script = align(base_words, other_words);
  if (options.refine) script = refine(script, base_words, other_words);
  UncertaintyMask mask =
      mask_from_disagreement(script, base_words.size(), options.disagreement).mask;
  mask.method = UncertaintyMethod::Tta;
  return mask;
}

UncertaintyMask ensemble_masks(std::span<const UncertaintyMask> masks) {
  require(!masks.empty(), "ensemble needs at least one mask");
  if (masks.size() == 1) return masks.front();
  UncertaintyMask out;
  out.method = UncertaintyMethod::Ensemble;
  out.flags = masks.front().flags;
  for (const auto& m : masks.subspan(1)) {
    require(m.size() == out.size(), "ensemble masks differ in length");
    for (std::size_t i = 0; i < out.size(); ++i) out.flags[i] = out.flags[i] || m.flags[i];
  }
  return out;
}

}  // namespace longscribe
