#include "longscribe/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "longscribe/alignment.hpp"
#include "longscribe/error.hpp"

namespace longscribe {

EvalReport evaluate_words(std::span<const std::string> ref, std::span<const std::string> hyp,
                          const NormalizeOptions& options) {
  std::unordered_map<std::string, std::uint32_t> ids;
  auto intern = [&](const std::string& key) {
    return ids.try_emplace(key, static_cast<std::uint32_t>(ids.size())).first->second;
  };
  std::vector<std::uint32_t> ref_keys;
  for (const auto& w : ref) {
    std::string key = normalize_word(w, options);
    if (!key.empty()) ref_keys.push_back(intern(key));
  }
  require(!ref_keys.empty(), "reference transcript has no words");
  std::vector<std::uint32_t> hyp_keys;
  std::vector<std::size_t> hyp_index;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    std::string key = normalize_word(hyp[i], options);
    if (key.empty()) continue;
    hyp_keys.push_back(intern(key));
    hyp_index.push_back(i);
  }

  EvalReport report;
  report.n_ref_words = ref_keys.size();
  report.n_hyp_words = hyp.size();
  report.per_word_correct.assign(hyp.size(), true);
  const EditScript script = align_keys(ref_keys, hyp_keys);
  for (const DiffOp& op : script.ops) {
    switch (op.kind) {
      case DiffKind::Equal:
        break;
      case DiffKind::Replace:
        report.substitutions += op.other.size();
        for (std::size_t k = op.other.begin; k < op.other.end; ++k) {
          report.per_word_correct[hyp_index[k]] = false;
        }
        break;
      case DiffKind::Insert:
        report.insertions += op.other.size();
        for (std::size_t k = op.other.begin; k < op.other.end; ++k) {
          report.per_word_correct[hyp_index[k]] = false;
        }
        break;
      case DiffKind::Delete:
        report.deletions += op.base.size();
        report.missed_ref_words += op.base.size();
        break;
    }
  }
  report.wer = static_cast<double>(report.substitutions + report.deletions + report.insertions) /
               static_cast<double>(report.n_ref_words);
  return report;
}

double wer(std::span<const std::string> ref, std::span<const std::string> hyp,
           const NormalizeOptions& options) {
  return evaluate_words(ref, hyp, options).wer;
}

std::vector<bool> word_error_targets(std::span<const std::string> ref,
                                     std::span<const std::string> hyp,
                                     const NormalizeOptions& options) {
  std::vector<bool> incorrect;
  for (bool ok : evaluate_words(ref, hyp, options).per_word_correct) incorrect.push_back(!ok);
  return incorrect;
}

UncertaintyPoint uncertainty_report(const UncertaintyMask& mask, const std::vector<bool>& incorrect) {
  require(mask.size() == incorrect.size(),
          "mask has " + std::to_string(mask.size()) + " flags but targets have " +
              std::to_string(incorrect.size()));
  std::size_t uncertain = 0;
  std::size_t errors = 0;
  std::size_t caught = 0;
  for (std::size_t i = 0; i < incorrect.size(); ++i) {
    uncertain += mask.flags[i];
    errors += incorrect[i];
    caught += mask.flags[i] && incorrect[i];
  }
  UncertaintyPoint point;
  point.uncertainty_ratio =
      incorrect.empty() ? 0.0 : static_cast<double>(uncertain) / static_cast<double>(incorrect.size());
  point.error_recall = errors == 0 ? 1.0 : static_cast<double>(caught) / static_cast<double>(errors);
  return point;
}

std::vector<UncertaintyPoint> score_sweep(const Transcription& transcription,
                                          const std::vector<bool>& incorrect,
                                          std::span<const double> thresholds) {
  require(std::is_sorted(thresholds.begin(), thresholds.end()), "thresholds must be sorted");
  std::vector<UncertaintyPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    UncertaintyPoint p = uncertainty_report(mask_from_scores(transcription, t), incorrect);
    p.threshold = t;
    points.push_back(p);
  }
  return points;
}

std::string points_to_csv(std::span<const UncertaintyPoint> points) {
  std::string out = "threshold,uncertainty_ratio,error_recall\n";
  char buf[96];
  for (const auto& p : points) {
    if (p.threshold) {
      std::snprintf(buf, sizeof buf, "%.17g,", *p.threshold);
      out += buf;
    } else {
      out += ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.uncertainty_ratio, p.error_recall);
    out += buf;
  }
  return out;
}

}  // namespace longscribe
