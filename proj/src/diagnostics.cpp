#include "gazekit/diagnostics.hpp"

#include "gazekit/error.hpp"
#include "gazekit/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

namespace gazekit {

using nlohmann::json;

double unique_output_ratio(std::span<const std::string> outputs) {
    if (outputs.empty()) throw Error(ErrorCode::EmptyList, "no outputs");
    std::unordered_set<std::string> distinct;
    for (const auto& o : outputs) distinct.insert(text::normalize(o));
    return static_cast<double>(distinct.size()) / static_cast<double>(outputs.size());
}

TemplateRatio top1_template_ratio(std::span<const std::string> outputs, const TemplateMatcher& matcher) {
    if (outputs.empty()) throw Error(ErrorCode::EmptyList, "no outputs");
    std::vector<std::size_t> hist(kCaptionSpace, 0);
    TemplateRatio r;
    for (const auto& o : outputs) {
        if (auto id = matcher.match(o)) {
            ++hist[id->ordinal()];
            ++r.matched;
        } else {
            ++r.excluded;
        }
    }
    if (r.matched == 0) throw Error(ErrorCode::NoMatchedOutputs, "no output matches a pool template");
    const auto it = std::max_element(hist.begin(), hist.end()); // first max = smallest ordinal
    r.modal = TemplateId::from_ordinal(static_cast<std::size_t>(it - hist.begin()));
    r.modal_count = *it;
    r.ratio = static_cast<double>(r.modal_count) / static_cast<double>(r.matched);
    return r;
}

TemplateRatio top1_template_ratio(std::span<const std::string> outputs, const MacroPool& pool) {
    return top1_template_ratio(outputs, TemplateMatcher(pool));
}

WordStats output_word_stats(std::span<const PredictionRecord> records, std::optional<int> token_cap) {
    if (records.empty()) throw Error(ErrorCode::EmptyList, "no records");
    std::vector<std::size_t> words;
    words.reserve(records.size());
    std::size_t bare = 0, capped = 0;
    const std::string real_d = text::normalize(kRealDecision);
    const std::string fake_d = text::normalize(kFakeDecision);
    for (const auto& r : records) {
        words.push_back(text::word_count(r.raw_output));
        const std::string n = text::normalize(r.raw_output);
        if (n == real_d || n == fake_d) ++bare;
        if (token_cap) {
            if (!r.gen_len) throw Error(ErrorCode::MissingGenLen, "record " + r.id + " has no gen_len");
            if (*r.gen_len == *token_cap) ++capped;
        }
    }
    WordStats s;
    const auto n = static_cast<double>(records.size());
    double sum = 0.0;
    for (auto w : words) sum += static_cast<double>(w);
    s.mean_words = sum / n;
    std::sort(words.begin(), words.end());
    const std::size_t mid = words.size() / 2;
    s.median_words = words.size() % 2 ? static_cast<double>(words[mid])
                                       : (static_cast<double>(words[mid - 1]) + static_cast<double>(words[mid])) / 2.0;
    s.bare_decision_rate = static_cast<double>(bare) / n;
    if (token_cap) s.truncation_rate = static_cast<double>(capped) / n;
    return s;
}

std::optional<double> average_gen_len(std::span<const PredictionRecord> records) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.gen_len) {
            sum += *r.gen_len;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

namespace {

// Normalized forms per card, computed once per pool use.
struct CardIndex {
    std::vector<std::pair<std::string, std::vector<std::string>>> cards;

    explicit CardIndex(const MacroPool& pool) {
        for (const auto& c : pool.cards()) {
            std::vector<std::string> forms;
            for (const auto& f : c.forms) forms.push_back(text::normalize(f.text));
            cards.emplace_back(c.name, std::move(forms));
        }
    }

    std::set<std::string> invoked(std::string_view output) const {
        const std::string n = text::normalize(output);
        std::set<std::string> out;
        for (const auto& [name, forms] : cards)
            if (std::any_of(forms.begin(), forms.end(), [&](const std::string& f) { return n.find(f) != std::string::npos; }))
                out.insert(name);
        return out;
    }

    std::optional<std::string> first(std::string_view output) const {
        const std::string n = text::normalize(output);
        std::optional<std::string> best;
        std::size_t best_pos = std::string::npos;
        for (const auto& [name, forms] : cards)
            for (const auto& f : forms) {
                const auto pos = n.find(f);
                if (pos < best_pos) {
                    best_pos = pos;
                    best = name;
                }
            }
        return best;
    }
};

} // namespace

std::set<std::string> card_invocations(std::string_view output, const MacroPool& pool) {
    return CardIndex(pool).invoked(output);
}

std::optional<std::string> first_invoked_card(std::string_view output, const MacroPool& pool) {
    return CardIndex(pool).first(output);
}

std::vector<CardStats> card_accuracy(std::span<const PredictionRecord> records, const MacroPool& pool) {
    const CardIndex index(pool);
    std::vector<CardStats> stats;
    std::map<std::string, std::size_t> slot;
    for (const auto& c : pool.cards()) {
        slot.emplace(c.name, stats.size());
        CardStats s;
        s.card = c.name;
        stats.push_back(std::move(s));
    }
    for (const auto& r : records) {
        for (const auto& name : index.invoked(r.raw_output)) {
            CardStats& s = stats[slot.at(name)];
            ++s.invocations;
            if (r.verdict.parsed()) {
                ++s.scored;
                if (r.correct()) ++s.correct;
            }
        }
    }
    for (auto& s : stats) {
        if (!records.empty()) s.invocation_rate = static_cast<double>(s.invocations) / static_cast<double>(records.size());
        if (s.scored > 0) s.accuracy = static_cast<double>(s.correct) / static_cast<double>(s.scored);
    }
    return stats;
}

std::vector<CardDelta> card_rotation(std::span<const PredictionRecord> a, std::span<const PredictionRecord> b,
                                     const MacroPool& pool) {
    const auto sa = card_accuracy(a, pool);
    const auto sb = card_accuracy(b, pool);
    std::vector<CardDelta> out;
    for (std::size_t i = 0; i < sa.size(); ++i)
        out.push_back({sa[i].card, sa[i].invocation_rate, sb[i].invocation_rate,
                       sb[i].invocation_rate - sa[i].invocation_rate});
    std::stable_sort(out.begin(), out.end(), [](const CardDelta& x, const CardDelta& y) {
        if (std::abs(x.delta) != std::abs(y.delta)) return std::abs(x.delta) > std::abs(y.delta);
        return x.card < y.card;
    });
    return out;
}

KeywordFamilies load_keyword_families(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::SchemaViolation, "keyword families must be an object");
    KeywordFamilies fam;
    for (const auto& [name, list] : doc.items()) {
        if (!list.is_array()) throw Error(ErrorCode::SchemaViolation, "family " + name + " must be an array");
        auto& members = fam[name];
        for (const auto& k : list) {
            if (!k.is_string()) throw Error(ErrorCode::SchemaViolation, "family " + name + " members must be strings");
            members.push_back(k.get<std::string>());
        }
    }
    return fam;
}

KeywordFamilies load_keyword_families_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    try {
        return load_keyword_families(json::parse(in));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, path + ": " + e.what());
    }
}

KeywordStats keyword_family_stats(std::span<const std::string> outputs, const KeywordFamilies& families) {
    KeywordStats st;
    st.n = outputs.size();
    std::map<std::string, std::vector<bool>> hits;
    for (const auto& [name, members] : families) {
        auto& h = hits[name];
        h.reserve(outputs.size());
        for (const auto& o : outputs)
            h.push_back(std::any_of(members.begin(), members.end(), [&](const std::string& k) { return text::contains_word(o, k); }));
    }
    const double n = outputs.empty() ? 1.0 : static_cast<double>(outputs.size());
    for (const auto& [name, h] : hits)
        st.frequency[name] = static_cast<double>(std::count(h.begin(), h.end(), true)) / n;
    for (auto i = hits.begin(); i != hits.end(); ++i)
        for (auto j = std::next(i); j != hits.end(); ++j) {
            std::size_t both = 0;
            for (std::size_t k = 0; k < outputs.size(); ++k) both += i->second[k] && j->second[k];
            st.co_occurrence[{i->first, j->first}] = static_cast<double>(both) / n;
        }
    return st;
}

GateRule gate_rule_from_json(const json& j) {
    if (!j.is_object() || !j.contains("card") || !j["card"].is_string())
        throw Error(ErrorCode::SchemaViolation, "gate rule needs a string \"card\"");
    GateRule rule;
    rule.card = j["card"].get<std::string>();
    if (j.contains("when")) {
        const json& when = j["when"];
        if (!when.is_object()) throw Error(ErrorCode::SchemaViolation, "gate \"when\" must be an object");
        for (const auto& [key, value] : when.items()) {
            if (key != "person_count" || !value.is_number_integer())
                throw Error(ErrorCode::SchemaViolation, "unsupported gate predicate \"" + key + "\"");
            rule.person_count_equals = value.get<int>();
        }
    }
    const std::string action = j.value("action", std::string("real_to_fake"));
    if (action != "real_to_fake") throw Error(ErrorCode::SchemaViolation, "unsupported gate action \"" + action + "\"");
    return rule;
}

json to_json(const GateRule& rule) {
    json j = {{"card", rule.card}, {"action", "real_to_fake"}};
    if (rule.person_count_equals) j["when"] = {{"person_count", *rule.person_count_equals}};
    return j;
}

std::vector<GateRule> load_gate_rules_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, path + ": " + e.what());
    }
    std::vector<GateRule> rules;
    if (doc.is_array())
        for (const auto& r : doc) rules.push_back(gate_rule_from_json(r));
    else
        rules.push_back(gate_rule_from_json(doc));
    return rules;
}

namespace {

std::optional<double> try_ba(const ConfusionMatrix& cm) {
    if (cm.fakes() == 0 || cm.reals() == 0) return std::nullopt;
    return balanced_accuracy(cm);
}

ConfusionMatrix confusion_any(std::span<const PredictionRecord> records) {
    ConfusionMatrix cm;
    for (const auto& r : records) accumulate(cm, r.true_label, r.verdict.value);
    return cm;
}

} // namespace

GateOutcome apply_card_gate(std::span<const PredictionRecord> records, std::span<const GateRule> rules,
                            const MacroPool& pool) {
    const CardIndex index(pool);
    GateOutcome out;
    out.records.assign(records.begin(), records.end());
    for (auto& r : out.records) {
        const auto cards = index.invoked(r.raw_output);
        for (const auto& rule : rules) {
            if (!cards.contains(rule.card)) continue;
            if (rule.person_count_equals) {
                if (!r.person_count)
                    throw Error(ErrorCode::MissingPersonCount, "record " + r.id + " has no person_count");
                if (*r.person_count != *rule.person_count_equals) continue;
            }
            if (r.verdict.value == VerdictValue::Real) {
                r.verdict.value = VerdictValue::Fake;
                ++out.flipped;
            }
            break;
        }
    }
    out.before = confusion_any(records);
    out.after = confusion_any(out.records);
    out.ba_before = try_ba(out.before);
    out.ba_after = try_ba(out.after);
    if (out.ba_before && out.ba_after) out.delta_ba = *out.ba_after - *out.ba_before;
    out.delta_confusion = dissect(out.after) - dissect(out.before);
    return out;
}

WrongPoolReport wrong_pool_report(std::span<const PredictionRecord> records, const MacroPool& pool) {
    const CardIndex index(pool);
    std::map<std::string, std::size_t> wr, wf;
    WrongPoolReport rep;
    for (const auto& r : records) {
        if (!r.verdict.parsed() || r.correct()) continue;
        const std::string bucket = index.first(r.raw_output).value_or("other");
        if (r.true_label == Label::Fake) {
            ++wr[bucket];
            ++rep.wrong_real.size;
        } else {
            ++wf[bucket];
            ++rep.wrong_fake.size;
        }
    }
    auto fill = [](ErrorPool& pool_out, const std::map<std::string, std::size_t>& counts) {
        for (const auto& [name, n] : counts)
            pool_out.buckets.push_back({name, n, 100.0 * static_cast<double>(n) / static_cast<double>(pool_out.size)});
        std::stable_sort(pool_out.buckets.begin(), pool_out.buckets.end(),
                         [](const PoolBucket& a, const PoolBucket& b) { return a.count > b.count; });
    };
    fill(rep.wrong_real, wr);
    fill(rep.wrong_fake, wf);
    return rep;
}

json to_json(const WrongPoolReport& r) {
    auto pool_json = [](const ErrorPool& p) {
        json buckets = json::array();
        for (const auto& b : p.buckets) buckets.push_back({{"subtype", b.subtype}, {"n", b.count}, {"percent", b.percent}});
        return json{{"size", p.size}, {"buckets", buckets}};
    };
    return {{"wrong_real", pool_json(r.wrong_real)}, {"wrong_fake", pool_json(r.wrong_fake)}};
}

} // namespace gazekit
