#include "gazekit/corpus.hpp"
#include "gazekit/error.hpp"
#include "gazekit/random.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace gazekit;

namespace {

std::vector<PairRecord> synthetic_pairs(std::size_t n) {
    std::vector<GazeAnnotation> anns;
    for (std::size_t i = 0; anns.size() * 1 < n; ++i) {
        GazeAnnotation a;
        a.image_id = "img" + std::to_string(i);
        a.annotation_flag = 1;
        a.bbox_pairs.push_back({{10, 10, 50, 60}, {100, 10, 140, 60}});
        a.license = "https://example.org/l/" + std::to_string(i);
        anns.push_back(a);
    }
    return unpack_pairs(filter_mutual_gaze(anns));
}

// Pairs where base ids repeat in groups of random size.
std::vector<PairRecord> grouped_pairs(std::size_t n, DeterministicRng& rng) {
    std::vector<PairRecord> out;
    std::size_t group = 0;
    while (out.size() < n) {
        const std::size_t k = std::min<std::size_t>(1 + rng.below(4), n - out.size());
        for (std::size_t j = 0; j < k; ++j) {
            PairRecord p;
            p.base_id = "g" + std::to_string(group);
            p.image_id = p.base_id;
            p.bbox_a = {0, 0, 10, 10};
            p.bbox_b = {20, 0, 30, 10};
            out.push_back(p);
        }
        ++group;
    }
    return out;
}

std::map<Split, std::size_t> count_splits(const std::vector<PairRecord>& pairs) {
    std::map<Split, std::size_t> m;
    for (const auto& p : pairs) ++m[p.split];
    return m;
}

BenchmarkSample sample(std::string id, Label l, std::optional<std::string> gen, std::optional<std::string> caption = {}) {
    BenchmarkSample s;
    s.id = std::move(id);
    s.label = l;
    s.generator = std::move(gen);
    s.caption_text = std::move(caption);
    return s;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

} // namespace

TEST_CASE("mutual gaze filter and unpacking") {
    std::vector<GazeAnnotation> anns(3);
    anns[0] = {"a", 1, {{{0, 0, 10, 10}, {20, 0, 30, 10}}, {{40, 0, 50, 10}, {60, 0, 70, 10}}}, "lic-a"};
    anns[1] = {"b", 0, {{{0, 0, 10, 10}, {20, 0, 30, 10}}}, ""};
    anns[2] = {"c", 1, {{{0, 0, 10, 10}, {20, 0, 30, 10}}}, ""};
    const auto kept = filter_mutual_gaze(anns);
    REQUIRE(kept.size() == 2);
    const auto pairs = unpack_pairs(kept);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].base_id == "a#0");
    CHECK(pairs[1].base_id == "a#1");
    CHECK(pairs[2].base_id == "c#0");
    CHECK(pairs[1].bbox_a == FaceBBox{40, 0, 50, 10});
    CHECK(pairs[0].license == "lic-a");
    CHECK(pairs[0].perturbed_bbox() == pairs[0].bbox_a);

    anns[2].bbox_pairs[0].second = {5, 5, 5, 9};
    CHECK(code_of([&] { unpack_pairs(filter_mutual_gaze(anns)); }) == ErrorCode::DegenerateBBox);
}

TEST_CASE("split targets for the released corpus") {
    const SplitCounts c = split_targets(23415, {});
    CHECK(c.train == 18732);
    CHECK(c.val == 2341);
    CHECK(c.test == 2342);
    CHECK(code_of([] { split_targets(10, SplitRatios{{8, 0, 1}}); }) == ErrorCode::SchemaViolation);
}

TEST_CASE("23415-pair manifest splits to the datasheet counts") {
    const auto pairs = grouped_stratified_split(synthetic_pairs(23415), {}, 42);
    auto m = count_splits(pairs);
    CHECK(m[Split::Train] == 18732);
    CHECK(m[Split::Val] == 2341);
    CHECK(m[Split::Test] == 2342);
    CHECK(leakage_check(pairs).empty());

    const Datasheet sheet = build_datasheet(pairs, 42);
    REQUIRE(sheet.rows.size() == 4);
    CHECK(sheet.rows[0].real == 18732);
    CHECK(sheet.rows[0].fake == 18732);
    CHECK(sheet.rows[0].total == 37464);
    CHECK(sheet.rows[1].total == 4682);
    CHECK(sheet.rows[2].total == 4684);
    CHECK(sheet.rows[3].total == 46830);
    CHECK(sheet.license_pointers == 23415);
    const auto j = to_json(sheet);
    CHECK(j["license"]["images"] == "CC-BY-NC-4.0");
    CHECK(j["license"]["caption_pool"] == "CC0");
}

TEST_CASE("split determinism and leakage freedom over random inputs") {
    DeterministicRng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(3000);
        const std::uint64_t seed = rng.below(1u << 20);
        const auto pairs = grouped_pairs(n, rng);
        const auto a = grouped_stratified_split(pairs, {}, seed);
        const auto b = grouped_stratified_split(pairs, {}, seed);
        for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].split == b[i].split);
        CHECK(leakage_check(a).empty());
        for (const auto& p : a) CHECK(p.split != Split::Unassigned);

        // Cumulative fill overshoots a target by less than one group (max 4 pairs).
        const auto t = split_targets(n, {});
        auto m = count_splits(a);
        CHECK(m[Split::Train] >= t.train);
        CHECK(m[Split::Train] < t.train + 4);
        CHECK(m[Split::Train] + m[Split::Val] >= t.train + t.val);
        CHECK(m[Split::Train] + m[Split::Val] < t.train + t.val + 4);
    }
}

TEST_CASE("split is invariant to input order") {
    DeterministicRng rng(11);
    const auto pairs = grouped_pairs(500, rng);
    auto shuffled = pairs;
    rng.shuffle(std::span(shuffled));
    const auto a = grouped_stratified_split(pairs, {}, 3);
    const auto b = grouped_stratified_split(shuffled, {}, 3);
    std::map<std::string, Split> sa, sb;
    for (const auto& p : a) sa[p.base_id] = p.split;
    for (const auto& p : b) sb[p.base_id] = p.split;
    CHECK(sa == sb);
}

TEST_CASE("leakage check reports offending base ids") {
    std::vector<SplitSample> s{{"x", Label::Real, Split::Train},
                               {"x", Label::Fake, Split::Test},
                               {"y", Label::Real, Split::Val},
                               {"y", Label::Fake, Split::Val},
                               {"a", Label::Real, Split::Val},
                               {"a", Label::Fake, Split::Train}};
    CHECK(leakage_check(s) == std::vector<std::string>{"a", "x"});
}

TEST_CASE("person caption filter") {
    CHECK(person_caption_filter("A man rides a bike"));
    CHECK(person_caption_filter("Two WOMEN talking."));
    CHECK(person_caption_filter("people, everywhere"));
    CHECK(person_caption_filter("a girl and her dog"));
    CHECK_FALSE(person_caption_filter("A mandolin on a table"));
    CHECK_FALSE(person_caption_filter("A chairman speaks"));
    CHECK_FALSE(person_caption_filter("a boyfriend"));
    CHECK_FALSE(person_caption_filter("a dog in the park"));
    CHECK_FALSE(person_caption_filter(""));
}

TEST_CASE("seen caption removal") {
    std::vector<BenchmarkSample> s{sample("1", Label::Real, {}, "A man walks."), sample("2", Label::Real, {}, "a  MAN walks."),
                                   sample("3", Label::Real, {}, "A dog"), sample("4", Label::Real, {})};
    const std::vector<std::string> seen{"A man walks."};
    CHECK(remove_seen_captions(s, seen, DedupMode::Exact).size() == 3);
    const auto norm = remove_seen_captions(s, seen, DedupMode::Normalized);
    REQUIRE(norm.size() == 2);
    CHECK(norm[0].id == "3");
    CHECK(norm[1].id == "4");
}

TEST_CASE("partition keys") {
    CHECK(partition_key(sample("r", Label::Real, {})) == "real");
    CHECK(partition_key(sample("f", Label::Fake, "sdxl")) == "sdxl");
    CHECK(code_of([] { partition_key(sample("f", Label::Fake, {})); }) == ErrorCode::MissingKey);
}

TEST_CASE("balance partitions") {
    std::vector<BenchmarkSample> s;
    for (int i = 0; i < 10; ++i) s.push_back(sample("r" + std::to_string(i), Label::Real, {}));
    for (int i = 0; i < 4; ++i) s.push_back(sample("a" + std::to_string(i), Label::Fake, "gen_a"));
    for (int i = 0; i < 7; ++i) s.push_back(sample("b" + std::to_string(i), Label::Fake, "gen_b"));

    const auto out = balance_partitions(s, 42);
    CHECK(out.size() == 12);
    std::map<std::string, std::size_t> per;
    for (const auto& x : out) ++per[partition_key(x)];
    CHECK(per["real"] == 4);
    CHECK(per["gen_a"] == 4);
    CHECK(per["gen_b"] == 4);

    // Deterministic and independent of input order.
    auto reversed = s;
    std::reverse(reversed.begin(), reversed.end());
    const auto again = balance_partitions(reversed, 42);
    REQUIRE(again.size() == out.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i].id == out[i].id);

    // Adding a partition leaves the others' picks unchanged when the minimum holds.
    auto more = s;
    for (int i = 0; i < 5; ++i) more.push_back(sample("c" + std::to_string(i), Label::Fake, "gen_c"));
    const auto with_c = balance_partitions(more, 42);
    std::set<std::string> ids_out, ids_c;
    for (const auto& x : out) ids_out.insert(x.id);
    for (const auto& x : with_c)
        if (partition_key(x) != "gen_c") ids_c.insert(x.id);
    CHECK(ids_out == ids_c);

    CHECK(code_of([] { balance_partitions({}, 1); }) == ErrorCode::EmptyPartition);
    CHECK(code_of([&] { balance_partitions(s, 1, {"real", "gen_z"}); }) == ErrorCode::EmptyPartition);
}

TEST_CASE("pair record json round-trip") {
    PairRecord p;
    p.base_id = "img#0";
    p.image_id = "img";
    p.bbox_a = {1, 2, 3, 4};
    p.bbox_b = {5, 6, 7, 8};
    p.perturbed_participant = Participant::B;
    p.split = Split::Val;
    p.license = "lic";
    const PairRecord q = pair_from_json(to_json(p));
    CHECK(q.base_id == p.base_id);
    CHECK(q.bbox_b == p.bbox_b);
    CHECK(q.perturbed_participant == Participant::B);
    CHECK(q.split == Split::Val);
    CHECK(q.license == "lic");

    CHECK(code_of([] { pair_from_json({{"base_id", "x"}}); }) == ErrorCode::SchemaViolation);
    CHECK(code_of([] { bbox_from_json({1, 2, 3}); }) == ErrorCode::SchemaViolation);
}

TEST_CASE("balance partition sizes") {
    auto make = [](std::initializer_list<std::pair<const char*, int>> sizes) {
        std::vector<BenchmarkSample> s;
        for (const auto& [gen, n] : sizes)
            for (int i = 0; i < n; ++i) s.push_back(sample(std::string(gen) + std::to_string(i), Label::Fake, gen));
        return s;
    };
    auto sizes = [](const std::vector<BenchmarkSample>& s) {
        std::map<std::string, std::size_t> m;
        for (const auto& x : s) ++m[*x.generator];
        return m;
    };
    const auto small = balance_partitions(make({{"a", 5}, {"b", 3}, {"c", 7}}));
    for (const auto& [k, n] : sizes(small)) CHECK(n == 3);
    const auto big = balance_partitions(make({{"label_b_1", 2620}, {"label_b_2", 2700}, {"label_b_3", 2650}}));
    for (const auto& [k, n] : sizes(big)) CHECK(n == 2620);
    const auto even = make({{"a", 4}, {"b", 4}});
    const auto same = balance_partitions(even);
    std::set<std::string> x, y;
    for (const auto& s : even) x.insert(s.id);
    for (const auto& s : same) y.insert(s.id);
    CHECK(x == y);
}

TEST_CASE("datasheet recount") {
    const Datasheet empty = build_datasheet({}, 42);
    for (const auto& r : empty.rows) CHECK(r.total == 0);

    DeterministicRng rng(31);
    auto pairs = grouped_pairs(777, rng);
    pairs = grouped_stratified_split(pairs, SplitRatios{{6, 3, 1}}, 9);
    pairs.push_back(pairs.front());
    pairs.back().split = Split::Unassigned;
    const Datasheet sheet = build_datasheet(pairs, 9);
    std::size_t sum = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(sheet.rows[i].total == sheet.rows[i].real + sheet.rows[i].fake);
        CHECK(sheet.rows[i].total == 2 * sheet.rows[i].pairs);
        sum += sheet.rows[i].pairs;
    }
    CHECK(sheet.rows[3].pairs == sum);
    CHECK(sum == 777);
    CHECK(sheet.unassigned_pairs == 1);
}
