#include "gazekit/verdict.hpp"

#include "gazekit/error.hpp"
#include "gazekit/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace gazekit {

std::string_view to_string(VerdictValue v) {
    switch (v) {
    case VerdictValue::Real: return "real";
    case VerdictValue::Fake: return "fake";
    case VerdictValue::Unparseable: return "unparseable";
    }
    return "?";
}

std::string_view to_string(ParseMode m) {
    switch (m) {
    case ParseMode::StrictPrefix: return "strict";
    case ParseMode::FirstKeyword: return "first_keyword";
    case ParseMode::ThreeClass: return "three_class";
    }
    return "?";
}

std::optional<ParseMode> parse_mode_from_string(std::string_view s) {
    if (s == "strict" || s == "strict_prefix") return ParseMode::StrictPrefix;
    if (s == "first_keyword") return ParseMode::FirstKeyword;
    if (s == "three_class") return ParseMode::ThreeClass;
    return std::nullopt;
}

Verdict parse_strict(std::string_view raw, StrictOptions opts) {
    if (opts.lenient_leading_whitespace) {
        while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
    }
    if (raw.starts_with("This is a real image.")) return {VerdictValue::Real, ParseMode::StrictPrefix};
    if (raw.starts_with("This is a fake image.")) return {VerdictValue::Fake, ParseMode::StrictPrefix};
    return {VerdictValue::Unparseable, ParseMode::StrictPrefix};
}

Verdict parse_first_keyword(std::string_view raw) {
    const auto real = text::find_word(raw, "real");
    const auto fake = text::find_word(raw, "fake");
    Verdict v{VerdictValue::Unparseable, ParseMode::FirstKeyword};
    if (real == std::string_view::npos && fake == std::string_view::npos) return v;
    v.value = real < fake ? VerdictValue::Real : VerdictValue::Fake;
    return v;
}

Sida3Class parse_sida_class(std::string_view name) {
    std::string n = text::normalize(name);
    std::replace(n.begin(), n.end(), '_', ' ');
    if (n == "real") return Sida3Class::Real;
    if (n == "full synthetic" || n == "fully synthetic") return Sida3Class::FullSynthetic;
    if (n == "tampered") return Sida3Class::Tampered;
    throw Error(ErrorCode::UnknownClass, "unknown three-class label \"" + std::string(name) + "\"");
}

Verdict sida_binarize(Sida3Class c) {
    return {c == Sida3Class::Real ? VerdictValue::Real : VerdictValue::Fake, ParseMode::ThreeClass};
}

Verdict parse_three_class(std::string_view raw) {
    std::string flat(raw);
    std::replace(flat.begin(), flat.end(), '_', ' ');
    struct Hit {
        std::size_t pos;
        Sida3Class cls;
    };
    const std::array<std::pair<std::string_view, Sida3Class>, 5> keys{{
        {"real", Sida3Class::Real},
        {"full synthetic", Sida3Class::FullSynthetic},
        {"fully synthetic", Sida3Class::FullSynthetic},
        {"tampered", Sida3Class::Tampered},
        {"synthetic", Sida3Class::FullSynthetic},
    }};
    std::optional<Hit> best;
    for (const auto& [key, cls] : keys) {
        const auto pos = text::find_word(flat, key);
        if (pos != std::string_view::npos && (!best || pos < best->pos)) best = Hit{pos, cls};
    }
    if (!best) return {VerdictValue::Unparseable, ParseMode::ThreeClass};
    return sida_binarize(best->cls);
}

Verdict parse_verdict(std::string_view raw, ParseMode mode, StrictOptions opts) {
    switch (mode) {
    case ParseMode::StrictPrefix: return parse_strict(raw, opts);
    case ParseMode::FirstKeyword: return parse_first_keyword(raw);
    case ParseMode::ThreeClass: return parse_three_class(raw);
    }
    return {};
}

EffectiveCount effective_count(std::size_t n0, std::size_t n_eff) {
    EffectiveCount c{n0, std::min(n_eff, n0), 0.0};
    if (n0 > 0) c.failure_rate = static_cast<double>(n0 - c.n_eff) / static_cast<double>(n0);
    return c;
}

} // namespace gazekit
