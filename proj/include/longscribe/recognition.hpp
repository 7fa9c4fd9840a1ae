#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "longscribe/audio.hpp"
#include "longscribe/backends.hpp"
#include "longscribe/segmentation.hpp"

namespace longscribe {

enum class ScoreReduction { Min, Sum, Mean };

std::string_view to_string(ScoreReduction reduction);
std::optional<ScoreReduction> parse_reduction(std::string_view name);

// Half-open index range into Transcription::tokens.
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

struct Word {
  std::string text;
  std::optional<double> start_s;
  std::optional<double> end_s;
  TokenRange tokens;
  double score = 0.0;
};

struct Transcription {
  std::vector<Word> words;
  std::vector<TokenPiece> tokens;
  std::optional<std::size_t> chunk_id;  // unset for a concatenated transcript

  std::vector<std::string> texts() const;
  std::string text() const;  // words joined with single spaces
};

// Non-empty, all values <= 0.
double word_score(std::span<const double> logprobs, ScoreReduction reduction);

// Splits the decoded concatenation of non-special token bytes at whitespace.
// Each word's range is the smallest token run holding its bytes; a code
// point split across tokens pulls both tokens into the word. Whitespace-only
// tokens join the following word (or the preceding one at the end). A token
// that itself contains a word boundary is shared by the two words it touches.
// Throws Error(InvalidArgument) when the concatenation is not valid UTF-8.
std::vector<Word> group_tokens_into_words(std::span<const TokenPiece> tokens,
                                          ScoreReduction reduction = ScoreReduction::Min);

// Runs the recognizer on the chunk's slice, groups tokens into scored words
// and converts chunk-relative times to absolute (original-axis) seconds.
// Malformed backend output surfaces as Error(Protocol).
Transcription recognize(const AudioBuffer& buffer, const Chunk& chunk, Recognizer& backend,
                        ScoreReduction reduction = ScoreReduction::Min, std::size_t chunk_id = 0,
                        double time_scale = 1.0);

// Joins per-chunk transcripts in order, re-basing token indices.
Transcription concatenate(std::span<const Transcription> parts);

}  // namespace longscribe
