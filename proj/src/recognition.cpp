#include "longscribe/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "longscribe/error.hpp"
#include "longscribe/text.hpp"

namespace longscribe {

std::string_view to_string(ScoreReduction reduction) {
  switch (reduction) {
    case ScoreReduction::Min: return "min";
    case ScoreReduction::Sum: return "sum";
    case ScoreReduction::Mean: return "mean";
  }
  return "min";
}

std::optional<ScoreReduction> parse_reduction(std::string_view name) {
  if (name == "min") return ScoreReduction::Min;
  if (name == "sum") return ScoreReduction::Sum;
  if (name == "mean") return ScoreReduction::Mean;
  return std::nullopt;
}

std::vector<std::string> Transcription::texts() const {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.text);
  return out;
}

std::string Transcription::text() const { return join_words(texts()); }

double word_score(std::span<const double> logprobs, ScoreReduction reduction) {
  require(!logprobs.empty(), "word_score needs at least one log-probability");
  for (double lp : logprobs) require(std::isfinite(lp) && lp <= 0.0, "log-probabilities must be finite and <= 0");
  switch (reduction) {
    case ScoreReduction::Min:
      return *std::min_element(logprobs.begin(), logprobs.end());
    case ScoreReduction::Sum:
      return std::accumulate(logprobs.begin(), logprobs.end(), 0.0);
    case ScoreReduction::Mean:
      return std::accumulate(logprobs.begin(), logprobs.end(), 0.0) /
             static_cast<double>(logprobs.size());
  }
  return 0.0;
}

namespace {

bool whitespace_only(const std::string& bytes) {
  if (!utf8::is_valid(bytes)) return false;
  for (char32_t cp : utf8::decode(bytes)) {
    if (!is_space(cp)) return false;
  }
  return true;
}

}  // namespace

std::vector<Word> group_tokens_into_words(std::span<const TokenPiece> tokens,
                                          ScoreReduction reduction) {
  std::string all;
  std::vector<std::size_t> owner;  // byte -> token index
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].special) continue;
    all += tokens[t].bytes;
    owner.insert(owner.end(), tokens[t].bytes.size(), t);
  }
  if (!utf8::is_valid(all)) {
    fail(ErrorKind::InvalidArgument, "token bytes do not concatenate to valid UTF-8");
  }

  struct ByteSpan {
    std::size_t first;
    std::size_t last;  // inclusive
  };
  std::vector<ByteSpan> spans;
  std::optional<std::size_t> open;
  std::size_t pos = 0;
  while (pos < all.size()) {
    const auto cp = *utf8::decode_at(all, pos);
    if (is_space(cp.value)) {
      if (open) spans.push_back({*open, pos - 1});
      open.reset();
    } else if (!open) {
      open = pos;
    }
    pos += cp.length;
  }
  if (open) spans.push_back({*open, all.size() - 1});

  std::vector<Word> words;
  words.reserve(spans.size());
  for (const auto& span : spans) {
    Word w;
    w.text = all.substr(span.first, span.last - span.first + 1);
    w.tokens = {owner[span.first], owner[span.last] + 1};
    words.push_back(std::move(w));
  }

  // Whitespace-only tokens attach to the next word, without crossing specials.
  for (std::size_t k = 0; k < words.size(); ++k) {
    const std::size_t floor = k == 0 ? 0 : words[k - 1].tokens.end;
    std::size_t b = words[k].tokens.begin;
    while (b > floor && !tokens[b - 1].special && whitespace_only(tokens[b - 1].bytes)) --b;
    words[k].tokens.begin = b;
  }
  for (std::size_t k = 0; k < words.size(); ++k) {
    const std::size_t ceiling = k + 1 == words.size() ? tokens.size() : words[k + 1].tokens.begin;
    std::size_t e = words[k].tokens.end;
    while (e < ceiling && !tokens[e].special && whitespace_only(tokens[e].bytes)) ++e;
    words[k].tokens.end = e;
  }

  std::vector<double> logprobs;
  for (auto& w : words) {
    logprobs.clear();
    for (std::size_t t = w.tokens.begin; t < w.tokens.end; ++t) {
      const TokenPiece& token = tokens[t];
      if (token.special) continue;
      logprobs.push_back(token.logprob);
      if (token.start_s && !w.start_s) w.start_s = token.start_s;
      if (token.end_s) w.end_s = token.end_s;
    }
    w.score = word_score(logprobs, reduction);
  }
  return words;
}

Transcription recognize(const AudioBuffer& buffer, const Chunk& chunk, Recognizer& backend,
                        ScoreReduction reduction, std::size_t chunk_id, double time_scale) {
  require(time_scale > 0.0, "time scale must be positive");
  const AudioBuffer slice = buffer.slice(chunk.start_s, chunk.end_s);
  const ChunkContext context{chunk_id, chunk.start_s, chunk.end_s, time_scale};

  Transcription result;
  result.chunk_id = chunk_id;
  try {
    result.tokens = backend.recognize(slice, context);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::Backend, "recognizer '" + backend.name() + "' failed on chunk " +
                                 std::to_string(chunk_id) + ": " + e.what());
  }
  for (auto& token : result.tokens) {
    try {
      validate_token(token);
    } catch (const Error& e) {
      fail(ErrorKind::Protocol, "recognizer '" + backend.name() + "' chunk " +
                                    std::to_string(chunk_id) + ": " + e.what());
    }
    token.special = backend.is_special(token);
    if (token.start_s) token.start_s = (chunk.start_s + *token.start_s) / time_scale;
    if (token.end_s) token.end_s = (chunk.start_s + *token.end_s) / time_scale;
  }
  try {
    result.words = group_tokens_into_words(result.tokens, reduction);
  } catch (const Error& e) {
    fail(ErrorKind::Protocol, "recognizer '" + backend.name() + "' chunk " +
                                  std::to_string(chunk_id) + ": " + e.what());
  }
  return result;
}

Transcription concatenate(std::span<const Transcription> parts) {
  Transcription out;
  for (const auto& part : parts) {
    const std::size_t offset = out.tokens.size();
    out.tokens.insert(out.tokens.end(), part.tokens.begin(), part.tokens.end());
    for (Word w : part.words) {
      w.tokens.begin += offset;
      w.tokens.end += offset;
      out.words.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace longscribe
