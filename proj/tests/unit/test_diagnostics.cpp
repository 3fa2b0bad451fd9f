#include "gazekit/diagnostics.hpp"
#include "gazekit/error.hpp"
#include "gazekit/random.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cctype>

using namespace gazekit;
using gazekit::testing::data_path;
using gazekit::testing::default_pool;
using gazekit::testing::make_record;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Random outputs built from pool sentences, so card forms occur verbatim.
std::vector<PredictionRecord> random_records(DeterministicRng& rng, std::size_t n) {
    const MacroPool& pool = default_pool();
    std::vector<std::string> sentences;
    for (const auto& c : pool.cards())
        for (const auto& f : c.forms) sentences.push_back(f.text);
    std::vector<PredictionRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        const Label truth = rng.below(2) ? Label::Fake : Label::Real;
        const VerdictValue v = static_cast<VerdictValue>(rng.below(3));
        std::string text = v == VerdictValue::Fake ? "This is a fake image." : "This is a real image.";
        const std::size_t k = rng.below(4);
        for (std::size_t j = 0; j < k; ++j) text += " " + sentences[rng.below(sentences.size())];
        auto r = make_record(std::to_string(i), "b", truth, v, text);
        r.person_count = static_cast<int>(1 + rng.below(3));
        out.push_back(r);
    }
    return out;
}

bool invokes_oracle(const std::string& output, const Card& card) {
    std::string o = lower(output);
    return std::any_of(card.forms.begin(), card.forms.end(),
                       [&](const CardForm& f) { return o.find(lower(f.text)) != std::string::npos; });
}

} // namespace

TEST_CASE("unique output ratio") {
    const std::vector<std::string> same(10, "This is a fake image.");
    CHECK(unique_output_ratio(same) == doctest::Approx(0.1));
    const std::vector<std::string> norm{"A  b", "a b", "c"};
    CHECK(unique_output_ratio(norm) == doctest::Approx(2.0 / 3));
    CHECK(code_of([] { unique_output_ratio({}); }) == ErrorCode::EmptyList);

    DeterministicRng rng(4);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::string> outs;
        const std::size_t n = 1 + rng.below(50);
        for (std::size_t i = 0; i < n; ++i) outs.push_back("o" + std::to_string(rng.below(10)));
        const double r = unique_output_ratio(outs);
        CHECK(r >= 1.0 / static_cast<double>(n) - 1e-12);
        CHECK(r <= 1.0);
        auto perm = outs;
        rng.shuffle(std::span(perm));
        CHECK(unique_output_ratio(perm) == r);
    }
}

TEST_CASE("top1 template ratio") {
    const MacroPool& pool = default_pool();
    const TemplateMatcher matcher(pool);
    std::vector<std::string> uniform;
    for (std::size_t o = 0; o < kTemplatesPerLabel; ++o) uniform.push_back(compose(pool, TemplateId::from_ordinal(o)).text);
    CHECK(top1_template_ratio(uniform, matcher).ratio == doctest::Approx(1.0 / 625));

    const std::vector<std::string> same(5, compose(pool, {Label::Fake, 1, 1, 1, 1}).text);
    CHECK(top1_template_ratio(same, matcher).ratio == 1.0);

    // Histogram oracle: 526 modal + 474 spread + 30 unmatched.
    std::vector<std::string> outs(526, compose(pool, {Label::Real, 2, 0, 4, 1}).text);
    for (std::size_t i = 0; i < 474; ++i) outs.push_back(compose(pool, TemplateId::from_ordinal(700 + i % 300)).text);
    for (int i = 0; i < 30; ++i) outs.push_back("This is a real image.");
    const auto r = top1_template_ratio(outs, matcher);
    CHECK(r.ratio == doctest::Approx(0.526));
    CHECK(r.matched == 1000);
    CHECK(r.excluded == 30);
    CHECK(r.modal == TemplateId{Label::Real, 2, 0, 4, 1});
    CHECK(r.modal_count == 526);

    const std::vector<std::string> none{"nothing"};
    CHECK(code_of([&] { top1_template_ratio(none, matcher); }) == ErrorCode::NoMatchedOutputs);
    CHECK(code_of([&] { top1_template_ratio(std::span<const std::string>{}, matcher); }) == ErrorCode::EmptyList);
}

TEST_CASE("output word stats") {
    std::vector<PredictionRecord> recs(4, make_record("x", "b", Label::Fake, VerdictValue::Fake, "This is a fake image."));
    auto s = output_word_stats(recs);
    CHECK(s.mean_words == 5.0);
    CHECK(s.median_words == 5.0);
    CHECK(s.bare_decision_rate == 1.0);
    CHECK_FALSE(s.truncation_rate.has_value());
    CHECK(code_of([&] { output_word_stats(recs, 64); }) == ErrorCode::MissingGenLen);
    for (auto& r : recs) r.gen_len = 12;
    CHECK(*output_word_stats(recs, 64).truncation_rate == 0.0);
    recs[0].gen_len = 64;
    CHECK(*output_word_stats(recs, 64).truncation_rate == doctest::Approx(0.25));
    CHECK(average_gen_len(recs) == doctest::Approx((64 + 36) / 4.0));
    CHECK(code_of([] { output_word_stats({}); }) == ErrorCode::EmptyList);
}

TEST_CASE("decision-only shaped fixture") {
    // 887 bare decisions (5 words) and 113 longer outputs of 37 words.
    std::vector<PredictionRecord> recs;
    for (int i = 0; i < 887; ++i) recs.push_back(make_record("b", "g", Label::Real, VerdictValue::Real, "This is a real image."));
    std::string longer = "This is a real image.";
    for (int i = 0; i < 32; ++i) longer += " w";
    for (int i = 0; i < 113; ++i) recs.push_back(make_record("l", "g", Label::Real, VerdictValue::Real, longer));
    const auto s = output_word_stats(recs);
    CHECK(s.bare_decision_rate == doctest::Approx(0.887));
    CHECK(s.mean_words == doctest::Approx(8.616));
    // A bare decision is five whitespace words, so a majority of them fixes the median at 5.
    CHECK(s.median_words == 5.0);
}

TEST_CASE("card invocation and first card") {
    const MacroPool& pool = default_pool();
    const std::string out = compose(pool, {Label::Fake, 0, 0, 0, 0}).text;
    const auto cards = card_invocations(out, pool);
    CHECK(cards.contains("META_gaze"));
    CHECK(cards.contains("METHOD_targets_pupils"));
    CHECK(cards.contains("EVIDENCE_alignment"));
    CHECK(cards.contains("CONCLUSION_overall"));
    CHECK(first_invoked_card(out, pool) == "META_gaze");
    CHECK(first_invoked_card("nothing here", pool) == std::nullopt);
    CHECK(card_invocations("i FOCUSED primarily   on gaze behavior", pool).contains("META_gaze"));
}

TEST_CASE("card accuracy simple counts") {
    const MacroPool& pool = default_pool();
    const std::string scene0 = pool.scene()[0];
    std::vector<PredictionRecord> recs;
    for (int i = 0; i < 10; ++i)
        recs.push_back(make_record(std::to_string(i), "b", Label::Fake, i < 7 ? VerdictValue::Fake : VerdictValue::Real,
                                   "This is a fake image. " + scene0));
    const auto stats = card_accuracy(recs, pool);
    CHECK(stats.size() == pool.cards().size());
    for (const auto& s : stats) {
        if (s.card == "META_gaze") {
            CHECK(s.invocations == 10);
            CHECK(*s.accuracy == doctest::Approx(0.7));
            CHECK(s.invocation_rate == 1.0);
        } else if (s.card == "METHOD_coordination") {
            CHECK(s.invocations == 0);
            CHECK_FALSE(s.accuracy.has_value());
        }
    }
}

TEST_CASE("card accuracy matches filter-and-count oracle") {
    DeterministicRng rng(10);
    const auto recs = random_records(rng, 10000);
    const auto stats = card_accuracy(recs, default_pool());
    for (const auto& card : default_pool().cards()) {
        std::size_t inv = 0, scored = 0, correct = 0;
        for (const auto& r : recs) {
            if (!invokes_oracle(r.raw_output, card)) continue;
            ++inv;
            if (r.verdict.parsed()) {
                ++scored;
                if ((r.verdict.value == VerdictValue::Fake) == (r.true_label == Label::Fake)) ++correct;
            }
        }
        const auto it = std::find_if(stats.begin(), stats.end(), [&](const CardStats& s) { return s.card == card.name; });
        REQUIRE(it != stats.end());
        CHECK(it->invocations == inv);
        CHECK(it->scored == scored);
        CHECK(it->correct == correct);
        CHECK(it->invocation_rate == doctest::Approx(static_cast<double>(inv) / 10000));
        if (scored) CHECK(*it->accuracy == doctest::Approx(static_cast<double>(correct) / scored));
    }
}

TEST_CASE("card rotation") {
    const MacroPool& pool = default_pool();
    std::vector<PredictionRecord> a{make_record("1", "b", Label::Fake, VerdictValue::Fake, pool.scene()[0]),
                                    make_record("2", "b", Label::Fake, VerdictValue::Fake, pool.scene()[0])};
    std::vector<PredictionRecord> b{make_record("1", "b", Label::Fake, VerdictValue::Fake, pool.method()[1]),
                                    make_record("2", "b", Label::Fake, VerdictValue::Fake, pool.scene()[0])};
    const auto d = card_rotation(a, b, pool);
    REQUIRE(d.size() >= 2);
    CHECK(std::abs(d[0].delta) == doctest::Approx(0.5));
    CHECK(std::abs(d[1].delta) == doctest::Approx(0.5));
    CHECK(d[0].card < d[1].card);
}

TEST_CASE("keyword family stats") {
    const auto fams = load_keyword_families_file(data_path("keyword_families.json"));
    REQUIRE(fams.contains("gaze"));
    std::vector<std::string> outs{"The gaze of several people is coherent.", "Pupils aimed at multiple people.",
                                  "A smooth texture.", "Nothing.", "Eye direction looks fine."};
    const auto s = keyword_family_stats(outs, fams);
    CHECK(s.n == 5);
    CHECK(s.frequency.at("gaze") == doctest::Approx(0.6));
    CHECK(s.frequency.at("multi_person") == doctest::Approx(0.4));
    CHECK(s.frequency.at("texture") == doctest::Approx(0.2));
    CHECK(s.co_occurrence.at({"gaze", "multi_person"}) == doctest::Approx(0.4));

    // Every gaze mention also mentions multi-person: co-occurrence equals the marginal.
    std::vector<std::string> coupled{"gaze of multiple people", "gaze with several people", "plain"};
    const auto c = keyword_family_stats(coupled, fams);
    CHECK(c.co_occurrence.at({"gaze", "multi_person"}) == doctest::Approx(c.frequency.at("gaze")));
    CHECK(c.frequency.at("gaze") == doctest::Approx(c.frequency.at("multi_person")));

    KeywordFamilies empty{{"none", {}}, {"texture", {"texture"}}};
    const std::vector<std::string> tex{"texture here", "TEXTURE there"};
    const auto e = keyword_family_stats(tex, empty);
    CHECK(e.frequency.at("none") == 0.0);
    CHECK(e.frequency.at("texture") == 1.0);
}

TEST_CASE("card gate") {
    const MacroPool& pool = default_pool();
    const std::string gaze = "This is a real image. " + pool.scene()[0];
    const std::vector<GateRule> rules{{"META_gaze", 1, GateAction::RealToFake}};

    SUBCASE("no match leaves metrics unchanged") {
        std::vector<PredictionRecord> recs{make_record("1", "b", Label::Fake, VerdictValue::Real, "This is a real image."),
                                           make_record("2", "b", Label::Real, VerdictValue::Real, "This is a real image.")};
        const auto g = apply_card_gate(recs, rules, pool);
        CHECK(g.flipped == 0);
        CHECK(*g.delta_ba == 0.0);
    }
    SUBCASE("matched fakes raise BA") {
        std::vector<PredictionRecord> recs;
        for (int i = 0; i < 6; ++i) {
            auto r = make_record("f" + std::to_string(i), "b", Label::Fake, VerdictValue::Real, gaze);
            r.person_count = i < 4 ? 1 : 2;
            recs.push_back(r);
        }
        for (int i = 0; i < 4; ++i) {
            auto r = make_record("r" + std::to_string(i), "b", Label::Real, VerdictValue::Real, "This is a real image.");
            r.person_count = 1;
            recs.push_back(r);
        }
        const auto g = apply_card_gate(recs, rules, pool);
        CHECK(g.flipped == 4);
        CHECK(*g.delta_ba > 0);
        auto manual = recs;
        for (int i = 0; i < 4; ++i) manual[static_cast<std::size_t>(i)].verdict.value = VerdictValue::Fake;
        CHECK(*g.ba_after == doctest::Approx(balanced_accuracy(confusion(manual))));
        CHECK(g.delta_confusion == Dissection{-4, 4, 0, 0});
    }
    SUBCASE("matched reals lower TNR only") {
        std::vector<PredictionRecord> recs;
        for (int i = 0; i < 3; ++i) {
            auto r = make_record("r" + std::to_string(i), "b", Label::Real, VerdictValue::Real, gaze);
            r.person_count = 1;
            recs.push_back(r);
        }
        auto f = make_record("f", "b", Label::Fake, VerdictValue::Fake, "This is a fake image.");
        f.person_count = 3;
        recs.push_back(f);
        const auto g = apply_card_gate(recs, rules, pool);
        CHECK(true_positive_rate(g.after) == true_positive_rate(g.before));
        CHECK(true_negative_rate(g.after) < true_negative_rate(g.before));
    }
    SUBCASE("missing person count") {
        std::vector<PredictionRecord> recs{make_record("1", "b", Label::Fake, VerdictValue::Real, gaze)};
        CHECK(code_of([&] { apply_card_gate(recs, rules, pool); }) == ErrorCode::MissingPersonCount);
    }
}

TEST_CASE("gate properties over random records") {
    DeterministicRng rng(12);
    const MacroPool& pool = default_pool();
    for (int t = 0; t < 20; ++t) {
        const auto recs = random_records(rng, 500);
        const std::string card = pool.cards()[rng.below(pool.cards().size())].name;
        const std::vector<GateRule> rules{{card, static_cast<int>(1 + rng.below(3)), GateAction::RealToFake}};
        const auto g = apply_card_gate(recs, rules, pool);
        CHECK(true_positive_rate(g.after) >= true_positive_rate(g.before));
        for (std::size_t i = 0; i < recs.size(); ++i)
            if (recs[i].verdict.value != VerdictValue::Real) CHECK(g.records[i].verdict == recs[i].verdict);
        CHECK(*g.delta_ba == doctest::Approx(balanced_accuracy(confusion(g.records)) - balanced_accuracy(confusion(recs))));
        CHECK(g.after == confusion(g.records));
    }
}

TEST_CASE("gate rule json") {
    const auto rule = gate_rule_from_json({{"card", "META_gaze"}, {"when", {{"person_count", 1}}}, {"action", "real_to_fake"}});
    CHECK(rule.card == "META_gaze");
    CHECK(rule.person_count_equals == 1);
    CHECK(gate_rule_from_json(to_json(rule)).person_count_equals == 1);
    CHECK(code_of([] { gate_rule_from_json({{"card", "x"}, {"action", "fake_to_real"}}); }) == ErrorCode::SchemaViolation);
}

TEST_CASE("wrong pool buckets sum to pool size") {
    DeterministicRng rng(13);
    const auto recs = random_records(rng, 3000);
    const auto rep = wrong_pool_report(recs, default_pool());
    std::size_t wr = 0, wf = 0, sum_r = 0, sum_f = 0;
    for (const auto& r : recs) {
        if (r.true_label == Label::Fake && r.verdict.value == VerdictValue::Real) ++wr;
        if (r.true_label == Label::Real && r.verdict.value == VerdictValue::Fake) ++wf;
    }
    for (const auto& b : rep.wrong_real.buckets) sum_r += b.count;
    for (const auto& b : rep.wrong_fake.buckets) sum_f += b.count;
    CHECK(rep.wrong_real.size == wr);
    CHECK(rep.wrong_fake.size == wf);
    CHECK(sum_r == wr);
    CHECK(sum_f == wf);
    for (std::size_t i = 1; i < rep.wrong_real.buckets.size(); ++i)
        CHECK(rep.wrong_real.buckets[i - 1].count >= rep.wrong_real.buckets[i].count);
    const auto j = to_json(rep);
    CHECK(j["wrong_real"]["size"] == wr);
}

TEST_CASE("card rotation constructed fixtures") {
    const MacroPool& pool = default_pool();
    const std::string scene0 = pool.scene()[0], method2 = pool.method()[2];
    std::vector<PredictionRecord> a;
    for (int i = 0; i < 8; ++i) a.push_back(make_record(std::to_string(i), "b", Label::Fake, VerdictValue::Fake, scene0 + " " + method2));
    for (const auto& d : card_rotation(a, a, pool)) CHECK(d.delta == 0.0);

    auto b = a;
    for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)].raw_output = method2;
    const auto deltas = card_rotation(a, b, pool);
    REQUIRE_FALSE(deltas.empty());
    CHECK(deltas[0].card == "META_gaze");
    CHECK(deltas[0].delta == doctest::Approx(-0.5 * deltas[0].rate_a));

    std::vector<PredictionRecord> c(8, make_record("x", "b", Label::Fake, VerdictValue::Fake, pool.conclusion(Label::Fake)[4]));
    for (const auto& d : card_rotation(a, c, pool)) {
        if (d.card == "META_gaze") CHECK(d.delta == doctest::Approx(-1.0));
        if (d.card == "CONCLUSION_balance") CHECK(d.delta == doctest::Approx(1.0));
    }
}

TEST_CASE("wrong pool decomposition") {
    const MacroPool& pool = default_pool();
    std::vector<PredictionRecord> recs;
    for (int i = 0; i < 94; ++i)
        recs.push_back(make_record("g" + std::to_string(i), "b", Label::Fake, VerdictValue::Real,
                                   "This is a real image. " + pool.scene()[0]));
    for (int i = 0; i < 19; ++i)
        recs.push_back(make_record("o" + std::to_string(i), "b", Label::Fake, VerdictValue::Real, "This is a real image."));
    const auto rep = wrong_pool_report(recs, pool);
    CHECK(rep.wrong_real.size == 113);
    REQUIRE(rep.wrong_real.buckets.size() == 2);
    CHECK(rep.wrong_real.buckets[0].subtype == "META_gaze");
    CHECK(round1(rep.wrong_real.buckets[0].percent, Rounding::HalfUp) == doctest::Approx(83.2));
    CHECK(rep.wrong_real.buckets[1].subtype == "other");
    CHECK(rep.wrong_fake.size == 0);
    CHECK(rep.wrong_fake.buckets.empty());

    const std::vector<PredictionRecord> right{make_record("1", "b", Label::Fake, VerdictValue::Fake, "This is a fake image.")};
    const auto none = wrong_pool_report(right, pool);
    CHECK(none.wrong_real.buckets.empty());
    CHECK(none.wrong_fake.buckets.empty());
}
