#include "artqa/text.h"

#include <stdexcept>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace artqa::text {

namespace {

void append_utf8(std::string& out, char32_t cp) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH,
            static_cast<UChar32>(cp), error);
  if (error) {
    out += "\xEF\xBF\xBD";
    return;
  }
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

char32_t next_codepoint(std::string_view utf8, std::size_t& pos) {
  const auto* data = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  auto i = static_cast<int32_t>(pos);
  UChar32 c = 0;
  U8_NEXT(data, i, length, c);
  pos = static_cast<std::size_t>(i);
  return c < 0 ? U'�' : static_cast<char32_t>(c);
}

std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  const icu::UnicodeString input = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  const icu::UnicodeString normalized = normalizer->normalize(input, status);
  if (U_FAILURE(status)) {
    throw std::runtime_error("NFC normalization failed");
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string lowercase(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    append_utf8(out, static_cast<char32_t>(u_tolower(
                         static_cast<UChar32>(next_codepoint(utf8, pos)))));
  }
  return out;
}

std::size_t codepoint_count(std::string_view utf8) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    next_codepoint(utf8, pos);
    ++count;
  }
  return count;
}

std::size_t byte_offset(std::string_view utf8, std::size_t cp) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < cp; ++i) {
    if (pos >= utf8.size()) {
      throw std::out_of_range("code point index past end of text");
    }
    next_codepoint(utf8, pos);
  }
  return pos;
}

std::size_t codepoint_offset(std::string_view utf8, std::size_t byte) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos < utf8.size() && pos < byte) {
    next_codepoint(utf8, pos);
    ++count;
  }
  return count;
}

std::string slice_codepoints(std::string_view utf8, std::size_t cp_begin,
                             std::size_t cp_end) {
  if (cp_end < cp_begin) {
    throw std::out_of_range("inverted code point range");
  }
  const std::size_t b = byte_offset(utf8, cp_begin);
  const std::size_t e = byte_offset(utf8, cp_end);
  return std::string(utf8.substr(b, e - b));
}

bool is_whitespace(char32_t cp) {
  return u_isUWhiteSpace(static_cast<UChar32>(cp));
}

bool is_punctuation(char32_t cp) {
  return u_ispunct(static_cast<UChar32>(cp));
}

std::string punctuation_to_space(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    const std::size_t start = pos;
    const char32_t cp = next_codepoint(utf8, pos);
    if (is_punctuation(cp)) {
      out += ' ';
    } else {
      out.append(utf8.substr(start, pos - start));
    }
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view utf8) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  std::size_t word_start = std::string_view::npos;
  while (pos < utf8.size()) {
    const std::size_t start = pos;
    const char32_t cp = next_codepoint(utf8, pos);
    if (is_whitespace(cp)) {
      if (word_start != std::string_view::npos) {
        out.emplace_back(utf8.substr(word_start, start - word_start));
        word_start = std::string_view::npos;
      }
    } else if (word_start == std::string_view::npos) {
      word_start = start;
    }
  }
  if (word_start != std::string_view::npos) {
    out.emplace_back(utf8.substr(word_start));
  }
  return out;
}

std::vector<WordToken> word_tokens(std::string_view utf8) {
  std::vector<WordToken> out;
  std::size_t pos = 0;
  WordToken current;
  bool in_word = false;
  while (pos < utf8.size()) {
    const std::size_t start = pos;
    const char32_t cp = next_codepoint(utf8, pos);
    const auto c = static_cast<UChar32>(cp);
    if (u_isalnum(c)) {
      if (!in_word) {
        current = WordToken{};
        current.begin = start;
        current.capitalized = u_isupper(c) || u_istitle(c);
        current.numeric = true;
        in_word = true;
      }
      current.numeric = current.numeric && u_isdigit(c);
      append_utf8(current.lower, static_cast<char32_t>(u_tolower(c)));
      current.end = pos;
    } else if (in_word) {
      out.push_back(std::move(current));
      in_word = false;
    }
  }
  if (in_word) out.push_back(std::move(current));
  return out;
}

std::string_view trim(std::string_view utf8) {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool found = false;
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    const std::size_t start = pos;
    const char32_t cp = next_codepoint(utf8, pos);
    if (!is_whitespace(cp)) {
      if (!found) begin = start;
      found = true;
      end = pos;
    }
  }
  return found ? utf8.substr(begin, end - begin) : std::string_view{};
}

}  // namespace artqa::text
