#include "artqa/lexicon.h"

#include <sstream>
#include <string_view>

#include "artqa/lexicon_data.h"

namespace artqa::lexicon {

namespace {

WordSet parse_word_list(std::string_view text) {
  WordSet words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') continue;
    words.insert(line);
  }
  return words;
}

}  // namespace

const WordSet& stopwords() {
  static const WordSet words = parse_word_list(lexicon_data::kStopwords);
  return words;
}

const WordSet& colors() {
  static const WordSet words = parse_word_list(lexicon_data::kColors);
  return words;
}

const WordSet& number_words() {
  static const WordSet words = {
      "zero",     "one",     "two",       "three",    "four",     "five",
      "six",      "seven",   "eight",     "nine",     "ten",      "eleven",
      "twelve",   "thirteen", "fourteen", "fifteen",  "sixteen",  "seventeen",
      "eighteen", "nineteen", "twenty",   "thirty",   "forty",    "fifty",
      "sixty",    "seventy", "eighty",    "ninety",   "hundred",  "thousand",
      "dozen"};
  return words;
}

const WordSet& months() {
  static const WordSet words = {"january", "february", "march",     "april",
                                "may",     "june",     "july",      "august",
                                "september", "october", "november", "december"};
  return words;
}

const WordSet& name_particles() {
  static const WordSet words = {"da",  "de",  "di",  "del", "della", "delle",
                                "dei", "van", "von", "der", "den",   "du",
                                "la",  "le",  "y",   "dos", "das",   "ter"};
  return words;
}

}  // namespace artqa::lexicon
