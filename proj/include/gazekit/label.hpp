#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gazekit {

enum class Label { Real = 0, Fake = 1 };

inline std::string_view to_string(Label l) { return l == Label::Real ? "real" : "fake"; }

inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "real") return Label::Real;
    if (s == "fake") return Label::Fake;
    return std::nullopt;
}

inline Label other(Label l) { return l == Label::Real ? Label::Fake : Label::Real; }

} // namespace gazekit
