#pragma once

#include "gazekit/label.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gazekit {

inline constexpr std::size_t kVariantsPerBlock = 5;
inline constexpr std::size_t kTemplatesPerLabel = 625; // 5^4
inline constexpr std::size_t kCaptionSpace = 2 * kTemplatesPerLabel;

inline constexpr std::string_view kRealDecision = "This is a real image.";
inline constexpr std::string_view kFakeDecision = "This is a fake image.";

enum class Block { Scene, Method, Evidence, Conclusion };

std::string_view to_string(Block b);

using Variants = std::array<std::string, kVariantsPerBlock>;

/// A surface string that signals a card: a pool sentence, or an extra
/// fragment (a shortened form the model emits).
struct CardForm {
    std::string text;
    std::optional<Block> block;  // empty for extra fragments
    std::optional<Label> label;  // set for evidence/conclusion sentences
    std::size_t index = 0;
};

/// An atomic rationale unit. By default one card per (block, variant slot),
/// so a label-branched slot's real and fake sentences share a card and the
/// standard pool has 20 cards. A pool file may rename or merge cards.
struct Card {
    std::string name;
    std::vector<CardForm> forms;
};

/// The caption macro pool: two decision sentences plus 20 block variants.
/// Scene and method variants are shared between labels; evidence and
/// conclusion variants branch by label.
class MacroPool {
public:
    MacroPool(Variants scene, Variants method, std::array<Variants, 2> evidence,
              std::array<Variants, 2> conclusion, std::map<std::string, std::string> card_names = {},
              std::map<std::string, std::string> extra_cards = {});

    const std::string& decision(Label l) const { return decision_[static_cast<int>(l)]; }
    const Variants& scene() const { return scene_; }
    const Variants& method() const { return method_; }
    const Variants& evidence(Label l) const { return evidence_[static_cast<int>(l)]; }
    const Variants& conclusion(Label l) const { return conclusion_[static_cast<int>(l)]; }

    /// Cards in first-appearance order (scene, method, evidence, conclusion,
    /// then extra-only cards).
    const std::vector<Card>& cards() const { return cards_; }
    const std::string& card_name(Block b, std::optional<Label> l, std::size_t idx) const;
    /// Cards backed by at least one pool sentence (20 for a standard pool).
    std::size_t pool_card_count() const;

    nlohmann::json to_json() const;

private:
    std::array<std::string, 2> decision_;
    Variants scene_;
    Variants method_;
    std::array<Variants, 2> evidence_;
    std::array<Variants, 2> conclusion_;
    std::vector<Card> cards_;
    std::map<std::string, std::string> sentence_card_; // pool sentence -> card name
};

/// Validates and loads a pool document. Throws Error with WrongCardinality,
/// DuplicateVariant, MissingDecisionSentence or SchemaViolation.
MacroPool load_pool(const nlohmann::json& doc);
MacroPool load_pool_file(const std::string& path);

struct TemplateId {
    Label label = Label::Real;
    std::uint8_t scene = 0;
    std::uint8_t method = 0;
    std::uint8_t evidence = 0;
    std::uint8_t conclusion = 0;

    /// Dense index in [0, 1250): label-major, then scene..conclusion.
    std::size_t ordinal() const;
    /// Dense index within the label, [0, 625).
    std::size_t within_label() const { return ordinal() % kTemplatesPerLabel; }
    static TemplateId from_ordinal(std::size_t ordinal);

    friend bool operator==(const TemplateId&, const TemplateId&) = default;
    friend auto operator<=>(const TemplateId& a, const TemplateId& b) { return a.ordinal() <=> b.ordinal(); }
};

struct Caption {
    TemplateId id;
    std::string text;
};

std::size_t caption_space_size(const MacroPool& pool);

/// Decision, Scene, Method, Evidence, Conclusion joined by single spaces.
/// Throws IndexOutOfRange.
Caption compose(const MacroPool& pool, const TemplateId& id);

struct Assignment {
    std::size_t sample_index; // per-label position, 0-based
    TemplateId id;
};

/// Stratified round-robin over a seed-shuffled template order, so each of a
/// label's 625 templates is used floor(n/625) or ceil(n/625) times. Reals
/// first, then fakes.
std::vector<Assignment> assign_captions(const MacroPool& pool, std::size_t n_per_label,
                                        std::uint64_t seed);

/// Reverse lookup from normalized caption text to template.
class TemplateMatcher {
public:
    explicit TemplateMatcher(const MacroPool& pool);
    std::optional<TemplateId> match(std::string_view output) const;

private:
    std::unordered_map<std::string, TemplateId> index_;
};

std::optional<TemplateId> canonical_template_of(std::string_view output, const MacroPool& pool);

} // namespace gazekit
