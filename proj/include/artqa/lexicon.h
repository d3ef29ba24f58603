/// @file lexicon.h
/// @brief Fixed word lists used by the lexical extractor.
///
/// The stopword and color lists are read from data/stopwords.txt and
/// data/colors.txt at build time.

#pragma once

#include <string>
#include <unordered_set>

namespace artqa::lexicon {

using WordSet = std::unordered_set<std::string>;

/// 50 English question stopwords (lowercase).
const WordSet& stopwords();

/// 24 color names (lowercase).
const WordSet& colors();

/// Spelled-out cardinals: "one" .. "twenty", tens, "hundred", "dozen", ...
const WordSet& number_words();

/// Lowercase month names.
const WordSet& months();

/// Lowercase particles that may appear inside a proper name
/// ("Leonardo da Vinci", "Vincent van Gogh").
const WordSet& name_particles();

}  // namespace artqa::lexicon
