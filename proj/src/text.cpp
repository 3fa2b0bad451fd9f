#include "gazekit/text.hpp"

#include <cctype>

namespace gazekit::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string collapse(std::string_view s, bool fold_case) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(fold_case ? lower(c) : c);
    }
    return out;
}

} // namespace

std::string normalize(std::string_view s) { return collapse(s, true); }

std::string collapse_whitespace(std::string_view s) { return collapse(s, false); }

std::size_t find_word(std::string_view haystack, std::string_view phrase) {
    const std::string hay = normalize(haystack);
    const std::string needle = normalize(phrase);
    if (needle.empty()) return std::string_view::npos;

    // Offsets are reported against the normalized haystack; callers only
    // compare them with each other.
    std::size_t pos = hay.find(needle);
    while (pos != std::string::npos) {
        const bool left_ok = pos == 0 || !is_alnum(hay[pos - 1]);
        const std::size_t end = pos + needle.size();
        const bool right_ok = end == hay.size() || !is_alnum(hay[end]);
        if (left_ok && right_ok) return pos;
        pos = hay.find(needle, pos + 1);
    }
    return std::string_view::npos;
}

bool contains_word(std::string_view haystack, std::string_view phrase) {
    return find_word(haystack, phrase) != std::string_view::npos;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(delim, start);
        parts.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

} // namespace gazekit::text
