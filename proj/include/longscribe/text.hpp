#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace longscribe {

namespace utf8 {

struct CodePoint {
  char32_t value;
  std::size_t length;  // encoded length in bytes
};

// Decodes the code point starting at byte `pos`. Rejects overlong forms,
// surrogates and values above U+10FFFF.
std::optional<CodePoint> decode_at(std::string_view bytes, std::size_t pos);

bool is_valid(std::string_view bytes);

// Throws Error(InvalidArgument) on malformed input.
std::u32string decode(std::string_view bytes);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view text);

}  // namespace utf8

bool is_space(char32_t cp);
bool is_punctuation(char32_t cp);
char32_t fold_case(char32_t cp);

enum class ScriptClass { Latin, Cyrillic, Digit, Other };
ScriptClass script_class(char32_t cp);

struct NormalizeOptions {
  bool casefold = true;
  bool strip_punctuation = true;
};

// Word key used for every text comparison (alignment, WER, targets).
std::string normalize_word(std::string_view word, const NormalizeOptions& options = {});

// Splits on Unicode whitespace; never returns empty words.
std::vector<std::string> split_words(std::string_view text);

std::string join_words(const std::vector<std::string>& words, std::string_view separator = " ");

// 2 * LCS(a, b) / (|a| + |b|) over code points of the normalized forms;
// 1.0 when both are empty.
double char_similarity(std::string_view a, std::string_view b);

}  // namespace longscribe
