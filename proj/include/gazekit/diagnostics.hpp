#pragma once

#include "gazekit/macro_pool.hpp"
#include "gazekit/metrics.hpp"
#include "gazekit/records.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace gazekit {

/// |distinct normalized outputs| / n. Throws EmptyList.
double unique_output_ratio(std::span<const std::string> outputs);

struct TemplateRatio {
    double ratio = 0.0;            // modal count / matched
    std::size_t matched = 0;
    std::size_t excluded = 0;      // outputs with no canonical template
    TemplateId modal;              // smallest ordinal among ties
    std::size_t modal_count = 0;
};

/// Frequency of the most common canonical template among outputs that map
/// onto one. Throws EmptyList, or NoMatchedOutputs when nothing matches.
TemplateRatio top1_template_ratio(std::span<const std::string> outputs, const TemplateMatcher& matcher);
TemplateRatio top1_template_ratio(std::span<const std::string> outputs, const MacroPool& pool);

struct WordStats {
    double mean_words = 0.0;
    double median_words = 0.0;
    std::optional<double> truncation_rate; // set when a cap was given
    double bare_decision_rate = 0.0;
};

/// Whitespace word counts, share of outputs that are exactly a decision
/// sentence, and (with a cap) share whose gen_len equals the cap. Word
/// counts and token lengths are never mixed. Throws EmptyList, or
/// MissingGenLen when a cap is given and a record lacks gen_len.
WordStats output_word_stats(std::span<const PredictionRecord> records, std::optional<int> token_cap = std::nullopt);

/// Mean of recorded gen_len; nullopt when no record carries one.
std::optional<double> average_gen_len(std::span<const PredictionRecord> records);

/// Names of cards with a form that occurs as a substring of the normalized
/// output.
std::set<std::string> card_invocations(std::string_view output, const MacroPool& pool);

/// Name of the card whose form occurs earliest in the output.
std::optional<std::string> first_invoked_card(std::string_view output, const MacroPool& pool);

struct CardStats {
    std::string card;
    std::size_t invocations = 0;
    double invocation_rate = 0.0;     // over all records
    std::optional<double> accuracy;   // a_k among invoking parsed records; absent if none
    std::size_t correct = 0;
    std::size_t scored = 0;           // invoking records with a parsed verdict
};

/// One entry per pool card in pool order.
std::vector<CardStats> card_accuracy(std::span<const PredictionRecord> records, const MacroPool& pool);

struct CardDelta {
    std::string card;
    double rate_a = 0.0;
    double rate_b = 0.0;
    double delta = 0.0; // rate_b - rate_a
};

/// Per-card invocation-rate change from `a` to `b`, sorted by |delta|
/// descending, then card name.
std::vector<CardDelta> card_rotation(std::span<const PredictionRecord> a, std::span<const PredictionRecord> b,
                                     const MacroPool& pool);

using KeywordFamilies = std::map<std::string, std::vector<std::string>>;

KeywordFamilies load_keyword_families(const nlohmann::json& doc);
KeywordFamilies load_keyword_families_file(const std::string& path);

struct KeywordStats {
    std::map<std::string, double> frequency;                              // per family
    std::map<std::pair<std::string, std::string>, double> co_occurrence;  // unordered pairs, first < second
    std::size_t n = 0;
};

/// Share of outputs mentioning at least one family member (whole word,
/// case-insensitive), and for each family pair the share mentioning both.
KeywordStats keyword_family_stats(std::span<const std::string> outputs, const KeywordFamilies& families);

enum class GateAction { RealToFake };

/// Declarative gate: when `card` is invoked and the metadata predicate
/// holds, apply `action`.
struct GateRule {
    std::string card;
    std::optional<int> person_count_equals;
    GateAction action = GateAction::RealToFake;
};

GateRule gate_rule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GateRule& rule);
std::vector<GateRule> load_gate_rules_file(const std::string& path);

struct GateOutcome {
    std::vector<PredictionRecord> records; // regated copies
    std::size_t flipped = 0;
    ConfusionMatrix before;
    ConfusionMatrix after;
    std::optional<double> ba_before; // absent when a class is missing
    std::optional<double> ba_after;
    std::optional<double> delta_ba;
    Dissection delta_confusion;      // after - before
};

/// Flips Real verdicts to Fake on records where a rule's card is invoked
/// and its predicate holds. Throws MissingPersonCount when a predicate needs
/// person_count on a record that invokes the card but lacks it.
GateOutcome apply_card_gate(std::span<const PredictionRecord> records, std::span<const GateRule> rules,
                            const MacroPool& pool);

struct PoolBucket {
    std::string subtype; // card name or "other"
    std::size_t count = 0;
    double percent = 0.0; // of pool size
};

struct ErrorPool {
    std::size_t size = 0;
    std::vector<PoolBucket> buckets; // sorted by count desc, then name
};

struct WrongPoolReport {
    ErrorPool wrong_real; // fakes predicted real
    ErrorPool wrong_fake; // reals predicted fake
};

/// Buckets each error by the first card invoked in its output.
WrongPoolReport wrong_pool_report(std::span<const PredictionRecord> records, const MacroPool& pool);

nlohmann::json to_json(const WrongPoolReport& r);

} // namespace gazekit
