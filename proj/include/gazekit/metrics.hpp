#pragma once

#include "gazekit/records.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gazekit {

/// Counts under the fake-positive convention: fake is the positive class.
struct ConfusionMatrix {
    std::uint64_t tp = 0; // fake predicted fake
    std::uint64_t fp = 0; // real predicted fake
    std::uint64_t tn = 0; // real predicted real
    std::uint64_t fn = 0; // fake predicted real

    std::uint64_t fakes() const { return tp + fn; }
    std::uint64_t reals() const { return tn + fp; }
    std::uint64_t total() const { return tp + fp + tn + fn; }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
    friend ConfusionMatrix operator+(ConfusionMatrix a, const ConfusionMatrix& b) { return a += b; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Adds one prediction to the matrix; unparseable verdicts are ignored.
void accumulate(ConfusionMatrix& cm, Label truth, VerdictValue predicted);

/// Confusion over parsed records. Unparseable records are excluded, never
/// coerced. Throws MixedBenchmarks when records span several benchmarks.
ConfusionMatrix confusion(std::span<const PredictionRecord> records);

// All metrics are percentages.

/// 100 (TPR + TNR) / 2. Throws MissingClass when either class is absent.
double balanced_accuracy(const ConfusionMatrix& cm);
/// Mean of per-class F1; a class whose F1 denominator is 0 scores 0.
/// Throws MissingClass.
double macro_f1(const ConfusionMatrix& cm);
/// Matthews correlation; 0 when any marginal factor is 0.
double mcc(const ConfusionMatrix& cm);

double true_positive_rate(const ConfusionMatrix& cm); // fake recall, fraction
double true_negative_rate(const ConfusionMatrix& cm); // real recall, fraction

struct Dissection {
    std::int64_t wrong_real = 0; // missed fakes (fn)
    std::int64_t right_fake = 0; // caught fakes (tp)
    std::int64_t right_real = 0; // tn
    std::int64_t wrong_fake = 0; // reals flagged fake (fp)

    friend Dissection operator-(const Dissection& a, const Dissection& b) {
        return {a.wrong_real - b.wrong_real, a.right_fake - b.right_fake, a.right_real - b.right_real,
                a.wrong_fake - b.wrong_fake};
    }
    friend bool operator==(const Dissection&, const Dissection&) = default;
};

Dissection dissect(const ConfusionMatrix& cm);
ConfusionMatrix undissect(const Dissection& d);

/// 100 tp / (tp + fn) for an all-fake ground truth. Throws RealSamplePresent
/// if any real sample is present, MissingClass if there are no fakes.
double fake_only_accuracy(const ConfusionMatrix& cm);
double fake_only_accuracy(std::span<const PredictionRecord> records);

enum class View { Paired, FakeOnly };
std::string_view to_string(View v);

struct BenchmarkScore {
    std::string benchmark;
    View view = View::Paired;
    double ba = 0.0;                // fake-class accuracy in the fake-only view
    std::optional<double> macro_f1; // undefined in the fake-only view
    std::optional<double> mcc;
    std::size_t n0 = 0;
    std::size_t n_eff = 0;
    ConfusionMatrix cm;
};

/// Scores one benchmark. With no forced view the view follows the ground
/// truth: paired when both classes are present, fake-only when there are no
/// reals. Forcing Paired on a fake-only set throws MissingClass; forcing
/// FakeOnly on a set with reals throws RealSamplePresent.
BenchmarkScore score_benchmark(std::span<const PredictionRecord> records, std::optional<View> forced = std::nullopt);

/// Each slice is all reals plus one generator's fakes.
std::map<std::string, BenchmarkScore> per_generator_scores(std::span<const PredictionRecord> records);

/// Unweighted elementwise mean. macro_f1 / mcc are averaged only when every
/// input carries them. Throws EmptyList.
BenchmarkScore mean_across_benchmarks(std::span<const BenchmarkScore> scores);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; // sample standard deviation (n - 1); 0 for one seed
};

struct SeedAggregate {
    MeanStd ba;
    std::optional<MeanStd> macro_f1;
    std::optional<MeanStd> mcc;
    std::size_t seeds = 0;
};

/// Post-hoc reducer over per-seed scores of one benchmark. Throws EmptyList.
SeedAggregate aggregate_seeds(std::span<const BenchmarkScore> per_seed);

enum class Rounding { HalfUp, Truncate };

/// Rounds a percentage to one decimal. Truncate drops digits toward zero;
/// HalfUp rounds ties away from zero. A 1e-9 guard absorbs binary
/// representation error in either direction.
double round1(double value, Rounding mode);

} // namespace gazekit
