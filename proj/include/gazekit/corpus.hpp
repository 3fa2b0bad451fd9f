#pragma once

#include "gazekit/geometry.hpp"
#include "gazekit/label.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gazekit {

enum class Split { Unassigned, Train, Val, Test };
enum class Participant { A, B };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

using BBoxPair = std::pair<FaceBBox, FaceBBox>;

/// One mutual-gaze source image as annotated upstream.
struct GazeAnnotation {
    std::string image_id;
    int annotation_flag = 0;
    std::vector<BBoxPair> bbox_pairs;
    std::string license; // opaque per-image license pointer
};

/// One real/fake pair sharing a base identity. The fake perturbs the eye
/// region of `perturbed_participant` only.
struct PairRecord {
    std::string base_id;
    std::string image_id;
    FaceBBox bbox_a;
    FaceBBox bbox_b;
    Participant perturbed_participant = Participant::A;
    Split split = Split::Unassigned;
    std::string license;

    const FaceBBox& perturbed_bbox() const { return perturbed_participant == Participant::A ? bbox_a : bbox_b; }
};

/// Keeps records with annotation_flag == 1 (mutual eye contact).
std::vector<GazeAnnotation> filter_mutual_gaze(const std::vector<GazeAnnotation>& annotations);

/// One PairRecord per bbox pair; base_id = "<image_id>#<pair index>".
/// Throws DegenerateBBox.
std::vector<PairRecord> unpack_pairs(const std::vector<GazeAnnotation>& retained);

struct SplitRatios {
    std::array<std::uint32_t, 3> parts{8, 1, 1}; // train : val : test
};

struct SplitCounts {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
};

/// Target pair counts: floor(N r_train / sum), floor(N r_val / sum), rest.
SplitCounts split_targets(std::size_t n_pairs, const SplitRatios& ratios);

/// Assigns splits with each base_id as an atomic unit. Groups are ordered by
/// base_id, shuffled with `seed`, then filled train, val, test against the
/// targets of split_targets. Returns the input records with split set.
std::vector<PairRecord> grouped_stratified_split(std::vector<PairRecord> pairs, const SplitRatios& ratios = {},
                                                 std::uint64_t seed = 42);

/// One image-level sample derived from a pair.
struct SplitSample {
    std::string base_id;
    Label label;
    Split split;
};

std::vector<SplitSample> unpack_samples(const std::vector<PairRecord>& pairs);

/// Base ids whose samples span two or more splits, sorted. Empty means ok.
std::vector<std::string> leakage_check(const std::vector<SplitSample>& samples);
std::vector<std::string> leakage_check(const std::vector<PairRecord>& pairs);

/// True iff the caption contains one of the eight strictly-human nouns as a
/// whole word, case-insensitive.
bool person_caption_filter(std::string_view caption);

enum class BenchmarkKind { CustomGaze, CocoaiPerson, CocoaiInteraction };

struct BenchmarkSample {
    std::string id;
    BenchmarkKind benchmark = BenchmarkKind::CocoaiPerson;
    Label label = Label::Real;
    std::optional<std::string> generator; // label_b for fakes
    std::optional<std::string> caption_text;
    std::optional<int> person_count;
};

enum class DedupMode { Exact, Normalized };

/// Drops samples whose caption already appeared in `seen` (an earlier
/// filtering round). Samples without a caption are kept.
std::vector<BenchmarkSample> remove_seen_captions(const std::vector<BenchmarkSample>& samples,
                                                  const std::vector<std::string>& seen, DedupMode mode);

/// Partition key: the generator, or "real" for reals without one.
/// Throws MissingKey for a fake without a generator.
std::string partition_key(const BenchmarkSample& s);

/// Downsamples every partition to the smallest partition's size. Selection
/// sorts each partition by id, shuffles with `seed`, keeps the prefix.
/// Output is ordered by partition key, then id. Throws EmptyPartition when
/// the input is empty or one of `expected_partitions` has no members.
std::vector<BenchmarkSample> balance_partitions(const std::vector<BenchmarkSample>& samples, std::uint64_t seed = 42,
                                                const std::vector<std::string>& expected_partitions = {});

struct DatasheetRow {
    std::string split;
    std::size_t pairs = 0;
    std::size_t real = 0;
    std::size_t fake = 0;
    std::size_t total = 0;
};

struct Datasheet {
    std::vector<DatasheetRow> rows; // train, val, test, total
    std::size_t unassigned_pairs = 0;
    std::size_t license_pointers = 0; // pairs that carry a per-image license pointer
    std::uint64_t seed = 42;
};

Datasheet build_datasheet(const std::vector<PairRecord>& pairs, std::uint64_t seed);
nlohmann::json to_json(const Datasheet& sheet);

// Line-delimited manifest records.
nlohmann::json to_json(const PairRecord& p);
PairRecord pair_from_json(const nlohmann::json& j); // throws Error(SchemaViolation)
nlohmann::json to_json(const FaceBBox& b);
FaceBBox bbox_from_json(const nlohmann::json& j);
/// {image_id, annotation_flag, bbox_pairs: [[bbox, bbox], ...], license?}
GazeAnnotation annotation_from_json(const nlohmann::json& j); // throws Error(SchemaViolation)

} // namespace gazekit
