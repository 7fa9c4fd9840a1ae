#include "longscribe/alignment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>

#include "longscribe/error.hpp"

namespace longscribe {

std::string_view to_string(DiffKind kind) {
  switch (kind) {
    case DiffKind::Equal: return "equal";
    case DiffKind::Insert: return "insert";
    case DiffKind::Delete: return "delete";
    case DiffKind::Replace: return "replace";
  }
  return "equal";
}

std::size_t EditScript::difference_count() const {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(), [](const DiffOp& op) { return op.is_difference(); }));
}

std::size_t EditScript::edit_cost() const {
  std::size_t cost = 0;
  for (const auto& op : ops) {
    if (op.kind != DiffKind::Equal) cost += std::max(op.base.size(), op.other.size());
  }
  return cost;
}

void validate_script(const EditScript& script, std::span<const std::string> base,
                     std::span<const std::string> other, const NormalizeOptions& options) {
  std::size_t b = 0;
  std::size_t o = 0;
  for (std::size_t i = 0; i < script.ops.size(); ++i) {
    const DiffOp& op = script.ops[i];
    const std::string where = "op " + std::to_string(i) + " (" + std::string(to_string(op.kind)) + ")";
    require(op.base.begin == b && op.other.begin == o, where + " does not continue the tiling");
    require(op.base.end >= op.base.begin && op.other.end >= op.other.begin, where + " has an inverted span");
    switch (op.kind) {
      case DiffKind::Equal:
        require(!op.resolved, where + " cannot be resolved");
        require(!op.base.empty() && op.base.size() == op.other.size(), where + " has unequal sides");
        for (std::size_t k = 0; k < op.base.size(); ++k) {
          require(op.base.end <= base.size() && op.other.end <= other.size(), where + " out of range");
          require(normalize_word(base[op.base.begin + k], options) ==
                      normalize_word(other[op.other.begin + k], options),
                  where + " pairs different words");
        }
        if (i > 0) require(script.ops[i - 1].kind != DiffKind::Equal, where + " follows another equal op");
        break;
      case DiffKind::Insert:
        require(op.base.empty() && !op.other.empty(), where + " must have only an other side");
        break;
      case DiffKind::Delete:
        require(!op.base.empty() && op.other.empty(), where + " must have only a base side");
        break;
      case DiffKind::Replace:
        require(!op.base.empty() && !op.other.empty(), where + " must have both sides");
        break;
    }
    b = op.base.end;
    o = op.other.end;
  }
  require(b == base.size() && o == other.size(), "script does not cover both sequences");
}

namespace {

// Merges neighbouring ops of the same kind and resolution state when their
// kind is in `mergeable`.
void coalesce(std::vector<DiffOp>& ops, std::initializer_list<DiffKind> mergeable) {
  std::vector<DiffOp> out;
  out.reserve(ops.size());
  for (const DiffOp& op : ops) {
    if (op.base.empty() && op.other.empty()) continue;
    if (!out.empty() && out.back().kind == op.kind && out.back().resolved == op.resolved &&
        std::find(mergeable.begin(), mergeable.end(), op.kind) != mergeable.end()) {
      out.back().base.end = op.base.end;
      out.back().other.end = op.other.end;
    } else {
      out.push_back(op);
    }
  }
  ops = std::move(out);
}

constexpr std::initializer_list<DiffKind> kAllKinds = {DiffKind::Equal, DiffKind::Insert,
                                                      DiffKind::Delete, DiffKind::Replace};

}  // namespace

EditScript align_keys(std::span<const std::uint32_t> base, std::span<const std::uint32_t> other) {
  const std::size_t n = base.size();
  const std::size_t m = other.size();
  const std::size_t width = m + 1;
  thread_local std::vector<std::uint32_t> table;
  table.resize((n + 1) * width);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return table[i * width + j]; };

  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    at(i, 0) = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = at(i - 1, j - 1) + (base[i - 1] == other[j - 1] ? 0u : 1u);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  // Backtrack from the end; steps come out reversed.
  thread_local std::vector<DiffKind> steps;
  steps.clear();
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = at(i, j);
    if (i > 0 && j > 0 && base[i - 1] == other[j - 1] && at(i - 1, j - 1) == here) {
      steps.push_back(DiffKind::Equal);
      --i;
      --j;
    } else if (i > 0 && j > 0 && at(i - 1, j - 1) + 1 == here) {
      steps.push_back(DiffKind::Replace);
      --i;
      --j;
    } else if (i > 0 && at(i - 1, j) + 1 == here) {
      steps.push_back(DiffKind::Delete);
      --i;
    } else {
      steps.push_back(DiffKind::Insert);
      --j;
    }
  }

  EditScript script;
  std::size_t b = 0;
  std::size_t o = 0;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const DiffKind kind = *it;
    const std::size_t db = kind == DiffKind::Insert ? 0 : 1;
    const std::size_t dot = kind == DiffKind::Delete ? 0 : 1;
    if (!script.ops.empty() && script.ops.back().kind == kind) {
      script.ops.back().base.end += db;
      script.ops.back().other.end += dot;
    } else {
      script.ops.push_back({kind, {b, b + db}, {o, o + dot}, false});
    }
    b += db;
    o += dot;
  }
  return script;
}

EditScript align(std::span<const std::string> base, std::span<const std::string> other,
                 const NormalizeOptions& options) {
  std::unordered_map<std::string, std::uint32_t> ids;
  auto intern = [&](std::span<const std::string> words) {
    std::vector<std::uint32_t> keys;
    keys.reserve(words.size());
    for (const auto& w : words) {
      auto [it, inserted] = ids.try_emplace(normalize_word(w, options),
                                            static_cast<std::uint32_t>(ids.size()));
      keys.push_back(it->second);
    }
    return keys;
  };
  const auto base_keys = intern(base);
  const auto other_keys = intern(other);
  return align_keys(base_keys, other_keys);
}

namespace {

std::string concat_side(std::span<const std::string> words, Span span) {
  std::string out;
  for (std::size_t k = span.begin; k < span.end; ++k) out += words[k];
  return out;
}

double op_similarity(const DiffOp& op, std::span<const std::string> base,
                     std::span<const std::string> other) {
  return char_similarity(concat_side(base, op.base), concat_side(other, op.other));
}

// Order-preserving pairing of the two sides of a replace.
std::vector<DiffOp> split_replace(const DiffOp& op, std::span<const std::string> base,
                                  std::span<const std::string> other, double pair_threshold) {
  const std::size_t n = op.base.size();
  const std::size_t m = op.other.size();
  std::vector<double> sim(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      sim[i * m + j] = char_similarity(base[op.base.begin + i], other[op.other.begin + j]);
    }
  }
  std::vector<double> best((n + 1) * (m + 1), 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return best[i * (m + 1) + j]; };
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double v = std::max(at(i - 1, j), at(i, j - 1));
      const double s = sim[(i - 1) * m + (j - 1)];
      if (s >= pair_threshold) v = std::max(v, at(i - 1, j - 1) + s);
      at(i, j) = v;
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 && j > 0) {
    const double s = sim[(i - 1) * m + (j - 1)];
    if (s >= pair_threshold && at(i, j) == at(i - 1, j - 1) + s) {
      pairs.emplace_back(i - 1, j - 1);
      --i;
      --j;
    } else if (at(i, j) == at(i - 1, j)) {
      --i;
    } else {
      --j;
    }
  }
  if (pairs.empty()) return {op};
  std::reverse(pairs.begin(), pairs.end());

  std::vector<DiffOp> out;
  auto emit_gap = [&](std::size_t b0, std::size_t b1, std::size_t o0, std::size_t o1) {
    const Span bs{op.base.begin + b0, op.base.begin + b1};
    const Span os{op.other.begin + o0, op.other.begin + o1};
    if (bs.empty() && os.empty()) return;
    const DiffKind kind = bs.empty() ? DiffKind::Insert
                          : os.empty() ? DiffKind::Delete
                                       : DiffKind::Replace;
    out.push_back({kind, bs, os, false});
  };
  std::size_t pb = 0;
  std::size_t po = 0;
  for (const auto& [bi, oi] : pairs) {
    emit_gap(pb, bi, po, oi);
    const Span bs{op.base.begin + bi, op.base.begin + bi + 1};
    const Span os{op.other.begin + oi, op.other.begin + oi + 1};
    const bool same = normalize_word(base[bs.begin]) == normalize_word(other[os.begin]);
    out.push_back({same ? DiffKind::Equal : DiffKind::Replace, bs, os, false});
    pb = bi + 1;
    po = oi + 1;
  }
  emit_gap(pb, n, po, m);
  return out;
}

bool is_open(const DiffOp& op, DiffKind kind) { return op.kind == kind && !op.resolved; }

bool is_open_gap(const DiffOp& op) {
  return is_open(op, DiffKind::Insert) || is_open(op, DiffKind::Delete);
}

// Tries to move the word of ops[gap] nearest to ops[target] (a replace) into
// the replace. Returns true when that raised the similarity.
bool try_absorb(std::vector<DiffOp>& ops, std::size_t target, std::size_t gap,
                std::span<const std::string> base, std::span<const std::string> other) {
  const bool gap_before = gap < target;
  DiffOp& donor = ops[gap];
  DiffOp candidate = ops[target];
  const bool from_base = donor.kind == DiffKind::Delete;
  Span& grow = from_base ? candidate.base : candidate.other;
  if (gap_before) {
    --grow.begin;
  } else {
    ++grow.end;
  }
  if (op_similarity(candidate, base, other) <= op_similarity(ops[target], base, other)) {
    return false;
  }
  Span& shrink = from_base ? donor.base : donor.other;
  if (gap_before) {
    --shrink.end;
    if (from_base) donor.other = {donor.other.end, donor.other.end};
  } else {
    ++shrink.begin;
    if (from_base) donor.other = {donor.other.begin, donor.other.begin};
  }
  ops[target] = candidate;
  if (shrink.empty()) ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(gap));
  return true;
}

}  // namespace

EditScript refine(const EditScript& script, std::span<const std::string> base,
                  std::span<const std::string> other, double pair_threshold) {
  std::vector<DiffOp> ops;
  for (const DiffOp& op : script.ops) {
    if (is_open(op, DiffKind::Replace) && op.base.size() != op.other.size()) {
      auto parts = split_replace(op, base, other, pair_threshold);
      ops.insert(ops.end(), parts.begin(), parts.end());
    } else {
      ops.push_back(op);
    }
  }
  coalesce(ops, {DiffKind::Equal, DiffKind::Insert, DiffKind::Delete});

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < ops.size() && !changed; ++i) {
      if (!is_open(ops[i], DiffKind::Replace)) continue;
      if (i > 0 && is_open_gap(ops[i - 1])) changed = try_absorb(ops, i, i - 1, base, other);
      if (!changed && i + 1 < ops.size() && is_open_gap(ops[i + 1])) {
        changed = try_absorb(ops, i, i + 1, base, other);
      }
    }
  }
  coalesce(ops, {DiffKind::Equal, DiffKind::Insert, DiffKind::Delete});
  return EditScript{std::move(ops)};
}

namespace {

std::optional<ScriptClass> uniform_letter_class(std::span<const std::string> words, Span span) {
  std::optional<ScriptClass> cls;
  for (std::size_t k = span.begin; k < span.end; ++k) {
    const std::string key = normalize_word(words[k]);
    if (!utf8::is_valid(key)) return std::nullopt;
    for (char32_t cp : utf8::decode(key)) {
      const ScriptClass c = script_class(cp);
      if (c != ScriptClass::Latin && c != ScriptClass::Cyrillic) return std::nullopt;
      if (cls && *cls != c) return std::nullopt;
      cls = c;
    }
  }
  return cls;
}

}  // namespace

bool is_transliteration(const DiffOp& op, std::span<const std::string> base,
                        std::span<const std::string> other) {
  if (op.kind != DiffKind::Replace) return false;
  const auto b = uniform_letter_class(base, op.base);
  const auto o = uniform_letter_class(other, op.other);
  return b && o && *b != *o;
}

EditScript apply_heuristics(const EditScript& script, std::span<const std::string> base,
                            std::span<const std::string> other,
                            std::span<const DiffHeuristic> heuristics) {
  EditScript out = script;
  for (DiffOp& op : out.ops) {
    if (!op.is_difference()) continue;
    for (const auto& h : heuristics) {
      if (h(op, base, other)) {
        op.resolved = true;
        break;
      }
    }
  }
  return out;
}

EditScript drop_script_mismatch_diffs(const EditScript& script, std::span<const std::string> base,
                                      std::span<const std::string> other) {
  const DiffHeuristic rules[] = {is_transliteration};
  return apply_heuristics(script, base, other, rules);
}

namespace {

// Base words in [lo, hi) with the chosen group members replaced by their
// other-side variants.
std::vector<std::string> candidate_words(std::span<const std::string> base,
                                         std::span<const std::string> other,
                                         const std::vector<const DiffOp*>& group,
                                         std::uint32_t assignment, std::size_t lo, std::size_t hi) {
  std::vector<std::string> words;
  std::size_t pos = lo;
  for (std::size_t g = 0; g < group.size(); ++g) {
    const DiffOp& op = *group[g];
    for (; pos < op.base.begin; ++pos) words.push_back(base[pos]);
    if (assignment & (1u << g)) {
      for (std::size_t k = op.other.begin; k < op.other.end; ++k) words.push_back(other[k]);
    } else {
      for (std::size_t k = op.base.begin; k < op.base.end; ++k) words.push_back(base[k]);
    }
    pos = op.base.end;
  }
  for (; pos < hi; ++pos) words.push_back(base[pos]);
  return words;
}

double score_with(SequenceScorer& lm, const std::vector<std::string>& words) {
  double s = 0.0;
  try {
    s = lm.score(words);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::Backend, "sequence scorer '" + lm.name() + "' failed: " + e.what());
  }
  if (!std::isfinite(s)) fail(ErrorKind::Protocol, "sequence scorer '" + lm.name() + "' returned a non-finite score");
  return s;
}

// Index of the best assignment; ties prefer fewer substitutions, then the
// numerically smaller assignment.
std::uint32_t best_assignment(SequenceScorer& lm, std::span<const std::string> base,
                              std::span<const std::string> other,
                              const std::vector<const DiffOp*>& group, std::size_t lo,
                              std::size_t hi) {
  const std::uint32_t count = 1u << group.size();
  std::uint32_t best = 0;
  double best_score = score_with(lm, candidate_words(base, other, group, 0, lo, hi));
  for (std::uint32_t a = 1; a < count; ++a) {
    const double s = score_with(lm, candidate_words(base, other, group, a, lo, hi));
    const bool better = s > best_score ||
                        (s == best_score && std::popcount(a) < std::popcount(best));
    if (better) {
      best = a;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

EditScript lm_validate(const EditScript& script, std::span<const std::string> base,
                       std::span<const std::string> other, SequenceScorer& lm,
                       const LmValidationParams& params) {
  EditScript out = script;
  std::vector<std::size_t> diffs;
  for (std::size_t i = 0; i < out.ops.size(); ++i) {
    if (out.ops[i].is_difference()) diffs.push_back(i);
  }

  std::size_t start = 0;
  while (start < diffs.size()) {
    std::size_t stop = start + 1;
    while (stop < diffs.size() &&
           out.ops[diffs[stop]].base.begin - out.ops[diffs[stop - 1]].base.end <= params.lookahead) {
      ++stop;
    }
    const std::size_t first_base = out.ops[diffs[start]].base.begin;
    const std::size_t last_base = out.ops[diffs[stop - 1]].base.end;
    const std::size_t lo = first_base > params.context_words ? first_base - params.context_words : 0;
    const std::size_t hi = std::min(base.size(), last_base + params.context_words);

    const std::size_t k = stop - start;
    if (k <= params.group_max && k < 32) {
      std::vector<const DiffOp*> group;
      for (std::size_t d = start; d < stop; ++d) group.push_back(&out.ops[diffs[d]]);
      const std::uint32_t chosen = best_assignment(lm, base, other, group, lo, hi);
      for (std::size_t g = 0; g < k; ++g) {
        if (!(chosen & (1u << g))) out.ops[diffs[start + g]].resolved = true;
      }
    } else {
      // Group too large for joint enumeration: decide each difference alone.
      std::vector<bool> keep(k, false);
      for (std::size_t d = start; d < stop; ++d) {
        const DiffOp& op = out.ops[diffs[d]];
        const std::size_t dlo = op.base.begin > params.context_words ? op.base.begin - params.context_words : 0;
        const std::size_t dhi = std::min(base.size(), op.base.end + params.context_words);
        const std::vector<const DiffOp*> single = {&op};
        keep[d - start] = best_assignment(lm, base, other, single, dlo, dhi) == 1u;
      }
      for (std::size_t d = start; d < stop; ++d) {
        if (!keep[d - start]) out.ops[diffs[d]].resolved = true;
      }
    }
    start = stop;
  }
  return out;
}

void append_script(EditScript& script, const EditScript& part, std::size_t base_offset,
                   std::size_t other_offset) {
  for (DiffOp op : part.ops) {
    op.base.begin += base_offset;
    op.base.end += base_offset;
    op.other.begin += other_offset;
    op.other.end += other_offset;
    if (!script.ops.empty() && op.kind == DiffKind::Equal &&
        script.ops.back().kind == DiffKind::Equal) {
      script.ops.back().base.end = op.base.end;
      script.ops.back().other.end = op.other.end;
    } else {
      script.ops.push_back(op);
    }
  }
}

}  // namespace longscribe
