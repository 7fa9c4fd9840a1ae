#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "longscribe/backends.hpp"
#include "longscribe/text.hpp"

namespace longscribe {

enum class DiffKind { Equal, Insert, Delete, Replace };

std::string_view to_string(DiffKind kind);

// Half-open word index range.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  friend bool operator==(const Span&, const Span&) = default;
};

// `resolved` marks a non-equal op whose base variant was accepted by a later
// stage (heuristics, LM validation); it is no longer a difference.
struct DiffOp {
  DiffKind kind = DiffKind::Equal;
  Span base;
  Span other;
  bool resolved = false;

  bool is_difference() const { return kind != DiffKind::Equal && !resolved; }
  friend bool operator==(const DiffOp&, const DiffOp&) = default;
};

struct EditScript {
  std::vector<DiffOp> ops;

  std::size_t difference_count() const;
  // S + D + I counted over all non-equal ops (resolved or not), where a
  // replace costs max of its side lengths.
  std::size_t edit_cost() const;
  friend bool operator==(const EditScript&, const EditScript&) = default;
};

// Throws Error(InvalidArgument) on any structural violation: spans must tile
// both sequences in order, kinds must match span shapes, equal ops must pair
// words with identical normalized text, and equal ops may not be adjacent.
void validate_script(const EditScript& script, std::span<const std::string> base,
                     std::span<const std::string> other, const NormalizeOptions& options = {});

// Minimum word edit distance alignment with unit costs on normalized words.
// Backtrack prefers equal, then replace, then delete, then insert; adjacent
// ops of one kind are coalesced.
EditScript align(std::span<const std::string> base, std::span<const std::string> other,
                 const NormalizeOptions& options = {});

// Same alignment over pre-interned word keys.
EditScript align_keys(std::span<const std::uint32_t> base, std::span<const std::uint32_t> other);

// Split unequal-length replaces by order-preserving pairing that maximises
// summed character similarity (pairs below `pair_threshold` are not formed),
// then absorb neighbouring inserts/deletes into replaces one word at a time
// while that raises the replace's concatenated character similarity.
EditScript refine(const EditScript& script, std::span<const std::string> base,
                  std::span<const std::string> other, double pair_threshold = 0.5);

// Returns true when the difference should be dropped (base variant accepted).
using DiffHeuristic = std::function<bool(const DiffOp& op, std::span<const std::string> base,
                                         std::span<const std::string> other)>;

// A replace whose base side is all Latin letters and other side all Cyrillic
// letters, or vice versa.
bool is_transliteration(const DiffOp& op, std::span<const std::string> base,
                        std::span<const std::string> other);

EditScript apply_heuristics(const EditScript& script, std::span<const std::string> base,
                            std::span<const std::string> other,
                            std::span<const DiffHeuristic> heuristics);

EditScript drop_script_mismatch_diffs(const EditScript& script, std::span<const std::string> base,
                                      std::span<const std::string> other);

struct LmValidationParams {
  std::size_t lookahead = 3;       // max base-word gap between dependent differences
  std::size_t group_max = 4;       // joint enumeration cap (2^k candidates)
  std::size_t context_words = 3;   // base words scored on each side of a group
};

// Keeps a difference only where the scorer prefers the other variant; ties
// go to the base. Differences within `lookahead` words of each other are
// decided jointly by scoring every assignment of the group.
EditScript lm_validate(const EditScript& script, std::span<const std::string> base,
                       std::span<const std::string> other, SequenceScorer& lm,
                       const LmValidationParams& params = {});

// Appends `part` (aligned on sub-sequences starting at the given offsets) to
// `script`, merging equal ops across the seam.
void append_script(EditScript& script, const EditScript& part, std::size_t base_offset,
                   std::size_t other_offset);

}  // namespace longscribe
