/// @file text.h
/// @brief UTF-8 helpers: normalization, code point offsets, word tokens.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace artqa::text {

/// NFC-normalizes UTF-8 text. Invalid sequences are replaced by U+FFFD.
std::string nfc(std::string_view utf8);

/// Per-code-point simple lowercase mapping.
std::string lowercase(std::string_view utf8);

std::size_t codepoint_count(std::string_view utf8);

/// Byte offset of the code point with index `cp`; `cp == codepoint_count`
/// yields `utf8.size()`. Throws std::out_of_range past the end.
std::size_t byte_offset(std::string_view utf8, std::size_t cp);

/// Number of code points that start before `byte`.
std::size_t codepoint_offset(std::string_view utf8, std::size_t byte);

/// Substring by code point range [cp_begin, cp_end).
std::string slice_codepoints(std::string_view utf8, std::size_t cp_begin,
                             std::size_t cp_end);

/// Replaces every Unicode punctuation code point (general category P*) with
/// a single space.
std::string punctuation_to_space(std::string_view utf8);

std::vector<std::string> split_whitespace(std::string_view utf8);

/// Maximal run of letters/digits, with byte offsets into the source.
struct WordToken {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string lower;
  bool capitalized = false;  // first code point is uppercase
  bool numeric = false;      // all code points are decimal digits
};

std::vector<WordToken> word_tokens(std::string_view utf8);

bool is_whitespace(char32_t cp);
bool is_punctuation(char32_t cp);

/// Decodes the code point starting at `pos` and advances `pos`.
char32_t next_codepoint(std::string_view utf8, std::size_t& pos);

/// Trims Unicode whitespace from both ends.
std::string_view trim(std::string_view utf8);

}  // namespace artqa::text
