#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace gazekit {

enum class VerdictValue { Real, Fake, Unparseable };
enum class ParseMode { StrictPrefix, FirstKeyword, ThreeClass };

std::string_view to_string(VerdictValue v);
std::string_view to_string(ParseMode m);
std::optional<ParseMode> parse_mode_from_string(std::string_view s);

struct Verdict {
    VerdictValue value = VerdictValue::Unparseable;
    ParseMode mode = ParseMode::StrictPrefix;

    bool parsed() const { return value != VerdictValue::Unparseable; }
    friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct StrictOptions {
    /// Skip leading whitespace before the anchor. Off by default.
    bool lenient_leading_whitespace = false;
};

/// Anchored, case-sensitive `^This is a (real|fake) image\.`
Verdict parse_strict(std::string_view raw, StrictOptions opts = {});

/// Earlier whole-word, case-insensitive occurrence of "real" vs "fake".
/// Positional, not semantic: "not fake but real" parses as Fake.
Verdict parse_first_keyword(std::string_view raw);

enum class Sida3Class { Real, FullSynthetic, Tampered };

/// Accepts REAL, FULL_SYNTHETIC / FULL SYNTHETIC / FULLY SYNTHETIC, TAMPERED
/// in any case. Throws UnknownClass.
Sida3Class parse_sida_class(std::string_view name);

/// Real -> Real; full synthetic and tampered -> Fake.
Verdict sida_binarize(Sida3Class c);

/// Three-class reading of free text: the first class keyword that occurs
/// decides, then binarizes. Unparseable when none occurs.
Verdict parse_three_class(std::string_view raw);

Verdict parse_verdict(std::string_view raw, ParseMode mode, StrictOptions opts = {});

struct EffectiveCount {
    std::size_t n0 = 0;
    std::size_t n_eff = 0;
    double failure_rate = 0.0; // (n0 - n_eff) / n0, 0 when n0 == 0
};

EffectiveCount effective_count(std::size_t n0, std::size_t n_eff);

} // namespace gazekit
