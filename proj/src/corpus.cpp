#include "gazekit/corpus.hpp"

#include "gazekit/error.hpp"
#include "gazekit/random.hpp"
#include "gazekit/text.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace gazekit {

using nlohmann::json;

std::string_view to_string(Split s) {
    switch (s) {
    case Split::Unassigned: return "unassigned";
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "?";
}

std::optional<Split> parse_split(std::string_view s) {
    for (Split v : {Split::Unassigned, Split::Train, Split::Val, Split::Test})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

std::vector<GazeAnnotation> filter_mutual_gaze(const std::vector<GazeAnnotation>& annotations) {
    std::vector<GazeAnnotation> out;
    std::copy_if(annotations.begin(), annotations.end(), std::back_inserter(out),
                 [](const GazeAnnotation& a) { return a.annotation_flag == 1; });
    return out;
}

std::vector<PairRecord> unpack_pairs(const std::vector<GazeAnnotation>& retained) {
    std::vector<PairRecord> out;
    for (const auto& image : retained) {
        for (std::size_t j = 0; j < image.bbox_pairs.size(); ++j) {
            const auto& [a, b] = image.bbox_pairs[j];
            validate(a);
            validate(b);
            PairRecord p;
            p.base_id = image.image_id + "#" + std::to_string(j);
            p.image_id = image.image_id;
            p.bbox_a = a;
            p.bbox_b = b;
            p.license = image.license;
            out.push_back(std::move(p));
        }
    }
    return out;
}

SplitCounts split_targets(std::size_t n_pairs, const SplitRatios& ratios) {
    const std::uint64_t sum = std::uint64_t{ratios.parts[0]} + ratios.parts[1] + ratios.parts[2];
    if (sum == 0 || ratios.parts[0] == 0 || ratios.parts[1] == 0 || ratios.parts[2] == 0)
        throw Error(ErrorCode::SchemaViolation, "split ratios must be positive");
    SplitCounts c;
    c.train = static_cast<std::size_t>(n_pairs * std::uint64_t{ratios.parts[0]} / sum);
    c.val = static_cast<std::size_t>(n_pairs * std::uint64_t{ratios.parts[1]} / sum);
    c.test = n_pairs - c.train - c.val;
    return c;
}

std::vector<PairRecord> grouped_stratified_split(std::vector<PairRecord> pairs, const SplitRatios& ratios,
                                                 std::uint64_t seed) {
    const SplitCounts target = split_targets(pairs.size(), ratios);

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < pairs.size(); ++i) groups[pairs[i].base_id].push_back(i);

    std::vector<const std::vector<std::size_t>*> order;
    order.reserve(groups.size());
    for (const auto& [id, members] : groups) order.push_back(&members);
    DeterministicRng rng(seed);
    rng.shuffle(std::span(order));

    // Every pair contributes one real and one fake, so filling pair counts
    // keeps each split 1:1.
    std::size_t filled = 0;
    for (const auto* members : order) {
        Split s = Split::Test;
        if (filled < target.train)
            s = Split::Train;
        else if (filled < target.train + target.val)
            s = Split::Val;
        for (std::size_t i : *members) pairs[i].split = s;
        filled += members->size();
    }
    return pairs;
}

std::vector<SplitSample> unpack_samples(const std::vector<PairRecord>& pairs) {
    std::vector<SplitSample> out;
    out.reserve(2 * pairs.size());
    for (const auto& p : pairs) {
        out.push_back({p.base_id, Label::Real, p.split});
        out.push_back({p.base_id, Label::Fake, p.split});
    }
    return out;
}

std::vector<std::string> leakage_check(const std::vector<SplitSample>& samples) {
    std::unordered_map<std::string, Split> first;
    std::set<std::string> bad;
    for (const auto& s : samples) {
        auto [it, inserted] = first.emplace(s.base_id, s.split);
        if (!inserted && it->second != s.split) bad.insert(s.base_id);
    }
    return {bad.begin(), bad.end()};
}

std::vector<std::string> leakage_check(const std::vector<PairRecord>& pairs) {
    return leakage_check(unpack_samples(pairs));
}

bool person_caption_filter(std::string_view caption) {
    static constexpr std::array<std::string_view, 8> kNouns{"man", "men", "woman", "women",
                                                            "people", "person", "boy", "girl"};
    return std::any_of(kNouns.begin(), kNouns.end(), [&](std::string_view n) { return text::contains_word(caption, n); });
}

std::vector<BenchmarkSample> remove_seen_captions(const std::vector<BenchmarkSample>& samples,
                                                  const std::vector<std::string>& seen, DedupMode mode) {
    auto key = [mode](std::string_view s) { return mode == DedupMode::Exact ? std::string(s) : text::normalize(s); };
    std::unordered_set<std::string> seen_keys;
    for (const auto& s : seen) seen_keys.insert(key(s));
    std::vector<BenchmarkSample> out;
    for (const auto& s : samples)
        if (!s.caption_text || !seen_keys.contains(key(*s.caption_text))) out.push_back(s);
    return out;
}

std::string partition_key(const BenchmarkSample& s) {
    if (s.generator) return *s.generator;
    if (s.label == Label::Real) return "real";
    throw Error(ErrorCode::MissingKey, "fake sample " + s.id + " has no generator");
}

std::vector<BenchmarkSample> balance_partitions(const std::vector<BenchmarkSample>& samples, std::uint64_t seed,
                                                const std::vector<std::string>& expected_partitions) {
    if (samples.empty()) throw Error(ErrorCode::EmptyPartition, "no samples to balance");
    std::map<std::string, std::vector<const BenchmarkSample*>> parts;
    for (const auto& p : expected_partitions) parts[p];
    for (const auto& s : samples) parts[partition_key(s)].push_back(&s);

    std::size_t smallest = SIZE_MAX;
    for (const auto& [key, members] : parts) {
        if (members.empty()) throw Error(ErrorCode::EmptyPartition, "partition " + key + " is empty");
        smallest = std::min(smallest, members.size());
    }

    std::vector<BenchmarkSample> out;
    out.reserve(smallest * parts.size());
    for (auto& [key, members] : parts) {
        std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->id < b->id; });
        // Seed each partition independently so adding a partition does not
        // change the selection inside the others.
        DeterministicRng rng(fnv1a(key, seed));
        rng.shuffle(std::span(members));
        std::vector<const BenchmarkSample*> kept(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(smallest));
        std::sort(kept.begin(), kept.end(), [](auto* a, auto* b) { return a->id < b->id; });
        for (auto* s : kept) out.push_back(*s);
    }
    return out;
}

Datasheet build_datasheet(const std::vector<PairRecord>& pairs, std::uint64_t seed) {
    Datasheet sheet;
    sheet.seed = seed;
    std::array<std::size_t, 3> counts{};
    for (const auto& p : pairs) {
        switch (p.split) {
        case Split::Train: ++counts[0]; break;
        case Split::Val: ++counts[1]; break;
        case Split::Test: ++counts[2]; break;
        case Split::Unassigned: ++sheet.unassigned_pairs; break;
        }
        if (!p.license.empty()) ++sheet.license_pointers;
    }
    auto row = [](std::string name, std::size_t n) { return DatasheetRow{std::move(name), n, n, n, 2 * n}; };
    sheet.rows = {row("train", counts[0]), row("val", counts[1]), row("test", counts[2]),
                  row("total", counts[0] + counts[1] + counts[2])};
    return sheet;
}

json to_json(const Datasheet& sheet) {
    json rows = json::array();
    for (const auto& r : sheet.rows)
        rows.push_back({{"split", r.split}, {"pairs", r.pairs}, {"real", r.real}, {"fake", r.fake}, {"total", r.total}});
    return {
        {"name", "Custom Gaze"},
        {"splits", rows},
        {"unassigned_pairs", sheet.unassigned_pairs},
        {"pair_structure", "identity-preserved; real and fake share base_id"},
        {"mask_region", "[y_min + 0.25h, y_min + 0.55h] x [x_min + 0.05w, x_max - 0.05w] within face bbox"},
        {"fake_construction", "eye-region inpainting"},
        {"inpaint_prompt", std::string(kInpaintPrompt)},
        {"license", {{"images", "CC-BY-NC-4.0"}, {"caption_pool", "CC0"}}},
        {"provenance",
         {{"real_source", "Open Images Mutual Gaze (Annotation=1)"},
          {"per_image_license_pointers", sheet.license_pointers}}},
        {"seed", sheet.seed},
    };
}

json to_json(const FaceBBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

FaceBBox bbox_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4 || !std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_number_integer(); }))
        throw Error(ErrorCode::SchemaViolation, "bbox must be [x_min, y_min, x_max, y_max] integers");
    return FaceBBox{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

json to_json(const PairRecord& p) {
    json j = {{"base_id", p.base_id},
              {"image_id", p.image_id},
              {"bbox_a", to_json(p.bbox_a)},
              {"bbox_b", to_json(p.bbox_b)},
              {"perturbed_participant", p.perturbed_participant == Participant::A ? "A" : "B"}};
    if (!p.license.empty()) j["license"] = p.license;
    if (p.split != Split::Unassigned) j["split"] = to_string(p.split);
    return j;
}

PairRecord pair_from_json(const json& j) {
    auto str = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_string())
            throw Error(ErrorCode::SchemaViolation, std::string(key) + " must be a string");
        return j[key].get<std::string>();
    };
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "pair record must be an object");
    PairRecord p;
    p.base_id = str("base_id");
    p.image_id = str("image_id");
    if (!j.contains("bbox_a") || !j.contains("bbox_b")) throw Error(ErrorCode::SchemaViolation, "bbox_a/bbox_b missing");
    p.bbox_a = bbox_from_json(j["bbox_a"]);
    p.bbox_b = bbox_from_json(j["bbox_b"]);
    const std::string who = j.contains("perturbed_participant") ? str("perturbed_participant") : "A";
    if (who != "A" && who != "B") throw Error(ErrorCode::SchemaViolation, "perturbed_participant must be A or B");
    p.perturbed_participant = who == "A" ? Participant::A : Participant::B;
    if (j.contains("license")) p.license = str("license");
    if (j.contains("split")) {
        auto s = parse_split(str("split"));
        if (!s) throw Error(ErrorCode::SchemaViolation, "unknown split " + j["split"].get<std::string>());
        p.split = *s;
    }
    return p;
}

GazeAnnotation annotation_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "annotation must be an object");
    if (!j.contains("image_id") || !j["image_id"].is_string())
        throw Error(ErrorCode::SchemaViolation, "image_id must be a string");
    if (!j.contains("annotation_flag") || !j["annotation_flag"].is_number_integer())
        throw Error(ErrorCode::SchemaViolation, "annotation_flag must be an integer");
    GazeAnnotation a;
    a.image_id = j["image_id"].get<std::string>();
    a.annotation_flag = j["annotation_flag"].get<int>();
    if (j.contains("bbox_pairs")) {
        if (!j["bbox_pairs"].is_array()) throw Error(ErrorCode::SchemaViolation, "bbox_pairs must be an array");
        for (const auto& pair : j["bbox_pairs"]) {
            if (!pair.is_array() || pair.size() != 2)
                throw Error(ErrorCode::SchemaViolation, "each bbox pair must hold two boxes");
            a.bbox_pairs.emplace_back(bbox_from_json(pair[0]), bbox_from_json(pair[1]));
        }
    }
    if (j.contains("license")) {
        if (!j["license"].is_string()) throw Error(ErrorCode::SchemaViolation, "license must be a string");
        a.license = j["license"].get<std::string>();
    }
    return a;
}

} // namespace gazekit
