#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "longscribe/alignment.hpp"
#include "longscribe/recognition.hpp"

namespace longscribe {

enum class UncertaintyMethod { ScoreThreshold, Disagreement, Tta, Ensemble };

std::string_view to_string(UncertaintyMethod method);

// One flag per base-transcription word; true = uncertain.
struct UncertaintyMask {
  std::vector<bool> flags;
  UncertaintyMethod method = UncertaintyMethod::ScoreThreshold;

  std::size_t size() const { return flags.size(); }
  std::size_t uncertain_count() const;
  friend bool operator==(const UncertaintyMask&, const UncertaintyMask&) = default;
};

// flag[i] = score(i) < threshold. Throws on a non-finite word score.
UncertaintyMask mask_from_scores(const Transcription& transcription, double threshold);

struct DisagreementOptions {
  bool flag_deletes = true;  // base words the other model omits
};

struct DisagreementMask {
  UncertaintyMask mask;
  // Words only the other model produced; they have no base word to flag.
  std::size_t unflaggable_inserts = 0;
};

// Flags base words covered by unresolved replace (and, by default, delete) ops.
DisagreementMask mask_from_disagreement(const EditScript& script, std::size_t base_len,
                                        const DisagreementOptions& options = {});

struct TtaOptions {
  bool refine = false;
  DisagreementOptions disagreement;
};

// align(base, stretched) -> mask_from_disagreement, tagged as Tta.
UncertaintyMask mask_from_tta(const Transcription& base, const Transcription& stretched,
                              const TtaOptions& options = {});

// Element-wise OR. Throws on an empty list or unequal lengths.
UncertaintyMask ensemble_masks(std::span<const UncertaintyMask> masks);

}  // namespace longscribe
