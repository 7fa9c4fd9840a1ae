#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longscribe/recognition.hpp"
#include "longscribe/text.hpp"
#include "longscribe/uncertainty.hpp"

namespace longscribe {

// Words whose normalized form is empty (bare punctuation) are ignored on both
// sides; such hypothesis words are reported as correct.
struct EvalReport {
  double wer = 0.0;
  std::size_t n_ref_words = 0;
  std::size_t n_hyp_words = 0;
  std::vector<bool> per_word_correct;  // one per hypothesis word
  std::size_t missed_ref_words = 0;    // reference words with no hypothesis counterpart
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
};

// Aligns ref (base side) to hyp. Replace and insert ops mark hypothesis words
// incorrect; delete ops count as missed reference words. Throws when the
// reference has no words.
EvalReport evaluate_words(std::span<const std::string> ref, std::span<const std::string> hyp,
                          const NormalizeOptions& options = {});

double wer(std::span<const std::string> ref, std::span<const std::string> hyp,
           const NormalizeOptions& options = {});

// true = the hypothesis word is incorrect.
std::vector<bool> word_error_targets(std::span<const std::string> ref,
                                     std::span<const std::string> hyp,
                                     const NormalizeOptions& options = {});

struct UncertaintyPoint {
  double uncertainty_ratio = 0.0;
  double error_recall = 0.0;
  std::optional<double> threshold;
};

// ratio = uncertain / words (0 for no words);
// recall = uncertain & incorrect / incorrect (1 when nothing is incorrect).
UncertaintyPoint uncertainty_report(const UncertaintyMask& mask, const std::vector<bool>& incorrect);

// One point per threshold via mask_from_scores. Thresholds must be sorted ascending.
std::vector<UncertaintyPoint> score_sweep(const Transcription& transcription,
                                          const std::vector<bool>& incorrect,
                                          std::span<const double> thresholds);

// "threshold,uncertainty_ratio,error_recall" rows; empty threshold cell when unset.
std::string points_to_csv(std::span<const UncertaintyPoint> points);

}  // namespace longscribe
