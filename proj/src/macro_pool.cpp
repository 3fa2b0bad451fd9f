#include "gazekit/macro_pool.hpp"

#include "gazekit/error.hpp"
#include "gazekit/random.hpp"
#include "gazekit/text.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace gazekit {

using nlohmann::json;

std::string_view to_string(Block b) {
    switch (b) {
    case Block::Scene: return "scene";
    case Block::Method: return "method";
    case Block::Evidence: return "evidence";
    case Block::Conclusion: return "conclusion";
    }
    return "?";
}

namespace {

std::string default_card_name(Block b, std::size_t idx) {
    return std::string(to_string(b)) + "_" + std::to_string(idx);
}

void check_sentence(const std::string& s, std::string_view where) {
    if (text::normalize(s).empty())
        throw Error(ErrorCode::SchemaViolation, "empty sentence at " + std::string(where));
}

} // namespace

MacroPool::MacroPool(Variants scene, Variants method, std::array<Variants, 2> evidence,
                     std::array<Variants, 2> conclusion, std::map<std::string, std::string> card_names,
                     std::map<std::string, std::string> extra_cards)
    : decision_{std::string(kRealDecision), std::string(kFakeDecision)},
      scene_(std::move(scene)),
      method_(std::move(method)),
      evidence_(std::move(evidence)),
      conclusion_(std::move(conclusion)) {
    std::set<std::string> seen{text::normalize(decision_[0]), text::normalize(decision_[1])};
    std::map<std::string, std::size_t> card_index;

    auto attach = [&](const std::string& name, CardForm form) {
        auto [it, inserted] = card_index.emplace(name, cards_.size());
        if (inserted) cards_.push_back(Card{name, {}});
        cards_[it->second].forms.push_back(std::move(form));
    };

    auto add = [&](const std::string& sentence, Block b, std::optional<Label> l, std::size_t idx) {
        check_sentence(sentence, default_card_name(b, idx));
        if (!seen.insert(text::normalize(sentence)).second)
            throw Error(ErrorCode::DuplicateVariant, "\"" + sentence + "\" appears more than once");
        std::string name = default_card_name(b, idx);
        if (auto it = card_names.find(sentence); it != card_names.end()) name = it->second;
        sentence_card_.emplace(sentence, name);
        attach(name, CardForm{sentence, b, l, idx});
    };

    for (std::size_t i = 0; i < kVariantsPerBlock; ++i) add(scene_[i], Block::Scene, std::nullopt, i);
    for (std::size_t i = 0; i < kVariantsPerBlock; ++i) add(method_[i], Block::Method, std::nullopt, i);
    for (std::size_t i = 0; i < kVariantsPerBlock; ++i)
        for (Label l : {Label::Real, Label::Fake}) add(evidence_[static_cast<int>(l)][i], Block::Evidence, l, i);
    for (std::size_t i = 0; i < kVariantsPerBlock; ++i)
        for (Label l : {Label::Real, Label::Fake})
            add(conclusion_[static_cast<int>(l)][i], Block::Conclusion, l, i);

    for (const auto& [sentence, name] : card_names)
        if (!sentence_card_.contains(sentence))
            throw Error(ErrorCode::SchemaViolation, "card \"" + name + "\" names a sentence not in the pool");

    for (const auto& [fragment, name] : extra_cards) {
        check_sentence(fragment, name);
        attach(name, CardForm{fragment, std::nullopt, std::nullopt, 0});
    }

    // Distinct sentences can still concatenate to the same caption when a
    // boundary shifts; the caption space must stay injective.
    std::set<std::string> captions;
    for (std::size_t o = 0; o < kCaptionSpace; ++o)
        captions.insert(text::normalize(compose(*this, TemplateId::from_ordinal(o)).text));
    if (captions.size() != kCaptionSpace)
        throw Error(ErrorCode::DuplicateVariant, "composed captions collide");
}

const std::string& MacroPool::card_name(Block b, std::optional<Label> l, std::size_t idx) const {
    if (idx >= kVariantsPerBlock) throw Error(ErrorCode::IndexOutOfRange, "variant index");
    const std::string* sentence = nullptr;
    switch (b) {
    case Block::Scene: sentence = &scene_[idx]; break;
    case Block::Method: sentence = &method_[idx]; break;
    case Block::Evidence: sentence = &evidence(l.value_or(Label::Real))[idx]; break;
    case Block::Conclusion: sentence = &conclusion(l.value_or(Label::Real))[idx]; break;
    }
    return sentence_card_.at(*sentence);
}

std::size_t MacroPool::pool_card_count() const {
    return static_cast<std::size_t>(std::count_if(cards_.begin(), cards_.end(), [](const Card& c) {
        return std::any_of(c.forms.begin(), c.forms.end(), [](const CardForm& f) { return f.block.has_value(); });
    }));
}

json MacroPool::to_json() const {
    auto arr = [](const Variants& v) { return json(std::vector<std::string>(v.begin(), v.end())); };
    json cards = json::object();
    json extra = json::object();
    for (const Card& card : cards_)
        for (const CardForm& form : card.forms) (form.block ? cards : extra)[form.text] = card.name;
    json doc = {
        {"decision", {{"real", decision_[0]}, {"fake", decision_[1]}}},
        {"p2", arr(scene_)},
        {"p3", arr(method_)},
        {"p4", {{"real", arr(evidence_[0])}, {"fake", arr(evidence_[1])}}},
        {"p5", {{"real", arr(conclusion_[0])}, {"fake", arr(conclusion_[1])}}},
        {"cards", cards},
    };
    if (!extra.empty()) doc["extra_cards"] = extra;
    return doc;
}

namespace {

Variants read_variants(const json& node, const std::string& where) {
    if (!node.is_array()) throw Error(ErrorCode::SchemaViolation, where + " must be an array");
    if (node.size() != kVariantsPerBlock)
        throw Error(ErrorCode::WrongCardinality,
                    where + " has " + std::to_string(node.size()) + " variants, expected 5");
    Variants v;
    for (std::size_t i = 0; i < kVariantsPerBlock; ++i) {
        if (!node[i].is_string()) throw Error(ErrorCode::SchemaViolation, where + " entries must be strings");
        v[i] = node[i].get<std::string>();
    }
    return v;
}

std::array<Variants, 2> read_branched(const json& doc, const std::string& key) {
    if (!doc.contains(key) || !doc[key].is_object())
        throw Error(ErrorCode::SchemaViolation, key + " must be an object with real/fake arrays");
    const json& node = doc[key];
    for (const char* l : {"real", "fake"})
        if (!node.contains(l)) throw Error(ErrorCode::WrongCardinality, key + "." + l + " missing");
    return {read_variants(node["real"], key + ".real"), read_variants(node["fake"], key + ".fake")};
}

std::map<std::string, std::string> read_string_map(const json& doc, const std::string& key) {
    std::map<std::string, std::string> out;
    if (!doc.contains(key)) return out;
    if (!doc[key].is_object()) throw Error(ErrorCode::SchemaViolation, key + " must be an object");
    for (const auto& [k, v] : doc[key].items()) {
        if (!v.is_string()) throw Error(ErrorCode::SchemaViolation, key + " values must be strings");
        out.emplace(k, v.get<std::string>());
    }
    return out;
}

} // namespace

MacroPool load_pool(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::SchemaViolation, "pool document must be an object");

    const json* decision = doc.contains("decision") ? &doc["decision"] : nullptr;
    for (auto [key, expected] : {std::pair{"real", kRealDecision}, std::pair{"fake", kFakeDecision}}) {
        if (!decision || !decision->contains(key) || !(*decision)[key].is_string())
            throw Error(ErrorCode::MissingDecisionSentence, std::string("decision.") + key + " missing");
        if ((*decision)[key].get<std::string>() != expected)
            throw Error(ErrorCode::MissingDecisionSentence,
                        std::string("decision.") + key + " must be exactly \"" + std::string(expected) + "\"");
    }
    for (const char* key : {"p2", "p3"})
        if (!doc.contains(key)) throw Error(ErrorCode::WrongCardinality, std::string(key) + " missing");

    return MacroPool(read_variants(doc["p2"], "p2"), read_variants(doc["p3"], "p3"), read_branched(doc, "p4"),
                     read_branched(doc, "p5"), read_string_map(doc, "cards"),
                     read_string_map(doc, "extra_cards"));
}

MacroPool load_pool_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open pool file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, path + ": " + e.what());
    }
    return load_pool(doc);
}

std::size_t TemplateId::ordinal() const {
    return static_cast<std::size_t>(label) * kTemplatesPerLabel + scene * 125u + method * 25u + evidence * 5u +
           conclusion;
}

TemplateId TemplateId::from_ordinal(std::size_t ordinal) {
    if (ordinal >= kCaptionSpace) throw Error(ErrorCode::IndexOutOfRange, "template ordinal");
    TemplateId id;
    id.label = ordinal >= kTemplatesPerLabel ? Label::Fake : Label::Real;
    std::size_t r = ordinal % kTemplatesPerLabel;
    id.scene = static_cast<std::uint8_t>(r / 125);
    id.method = static_cast<std::uint8_t>(r / 25 % 5);
    id.evidence = static_cast<std::uint8_t>(r / 5 % 5);
    id.conclusion = static_cast<std::uint8_t>(r % 5);
    return id;
}

std::size_t caption_space_size(const MacroPool& pool) {
    // One decision per label, so the label factor carries p1.
    return 1 * pool.scene().size() * pool.method().size() * pool.evidence(Label::Real).size() *
           pool.conclusion(Label::Real).size() * 2;
}

Caption compose(const MacroPool& pool, const TemplateId& id) {
    if (id.scene >= kVariantsPerBlock || id.method >= kVariantsPerBlock || id.evidence >= kVariantsPerBlock ||
        id.conclusion >= kVariantsPerBlock)
        throw Error(ErrorCode::IndexOutOfRange, "template index outside 0..4");
    std::string out = pool.decision(id.label);
    for (const std::string* s : {&pool.scene()[id.scene], &pool.method()[id.method],
                                 &pool.evidence(id.label)[id.evidence], &pool.conclusion(id.label)[id.conclusion]}) {
        out += ' ';
        out += *s;
    }
    return Caption{id, std::move(out)};
}

std::vector<Assignment> assign_captions(const MacroPool& /*pool*/, std::size_t n_per_label, std::uint64_t seed) {
    std::vector<Assignment> out;
    out.reserve(2 * n_per_label);
    DeterministicRng rng(seed);
    for (Label l : {Label::Real, Label::Fake}) {
        std::vector<std::size_t> order(kTemplatesPerLabel);
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::size_t>(l) * kTemplatesPerLabel + i;
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t k = 0; k < n_per_label; ++k)
            out.push_back(Assignment{k, TemplateId::from_ordinal(order[k % kTemplatesPerLabel])});
    }
    return out;
}

TemplateMatcher::TemplateMatcher(const MacroPool& pool) {
    index_.reserve(kCaptionSpace);
    for (std::size_t o = 0; o < kCaptionSpace; ++o) {
        const TemplateId id = TemplateId::from_ordinal(o);
        index_.emplace(text::normalize(compose(pool, id).text), id);
    }
}

std::optional<TemplateId> TemplateMatcher::match(std::string_view output) const {
    if (auto it = index_.find(text::normalize(output)); it != index_.end()) return it->second;
    return std::nullopt;
}

std::optional<TemplateId> canonical_template_of(std::string_view output, const MacroPool& pool) {
    return TemplateMatcher(pool).match(output);
}

} // namespace gazekit
