#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gazekit::text {

/// Lowercase (ASCII), collapse whitespace runs to one space, trim both ends.
/// This is the one normalization used for template matching, uniqueness and
/// card lookup, so ratios agree across modules.
std::string normalize(std::string_view s);

/// Collapse whitespace and trim, preserving case.
std::string collapse_whitespace(std::string_view s);

/// True when `phrase` occurs in `haystack` delimited by non-alphanumeric
/// characters (or the string ends) on both sides. Case-insensitive.
/// Multi-word phrases match across any whitespace run.
bool contains_word(std::string_view haystack, std::string_view phrase);

/// Offset of the first whole-word occurrence of `phrase`, or npos.
std::size_t find_word(std::string_view haystack, std::string_view phrase);

/// Number of whitespace-separated tokens.
std::size_t word_count(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);

} // namespace gazekit::text
