#include "gazekit/metrics.hpp"

#include "gazekit/error.hpp"

#include <cmath>
#include <set>

namespace gazekit {

void accumulate(ConfusionMatrix& cm, Label truth, VerdictValue predicted) {
    if (predicted == VerdictValue::Unparseable) return;
    const bool said_fake = predicted == VerdictValue::Fake;
    if (truth == Label::Fake)
        ++(said_fake ? cm.tp : cm.fn);
    else
        ++(said_fake ? cm.fp : cm.tn);
}

ConfusionMatrix confusion(std::span<const PredictionRecord> records) {
    ConfusionMatrix cm;
    const std::string* benchmark = nullptr;
    for (const auto& r : records) {
        if (benchmark && *benchmark != r.benchmark)
            throw Error(ErrorCode::MixedBenchmarks, "records mix \"" + *benchmark + "\" and \"" + r.benchmark + "\"");
        benchmark = &r.benchmark;
        accumulate(cm, r.true_label, r.verdict.value);
    }
    return cm;
}

namespace {

void require_both_classes(const ConfusionMatrix& cm) {
    if (cm.fakes() == 0) throw Error(ErrorCode::MissingClass, "no fake ground-truth samples");
    if (cm.reals() == 0) throw Error(ErrorCode::MissingClass, "no real ground-truth samples");
}

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

double true_positive_rate(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.fakes()); }
double true_negative_rate(const ConfusionMatrix& cm) { return ratio(cm.tn, cm.reals()); }

double balanced_accuracy(const ConfusionMatrix& cm) {
    require_both_classes(cm);
    return 100.0 * (true_positive_rate(cm) + true_negative_rate(cm)) / 2.0;
}

double macro_f1(const ConfusionMatrix& cm) {
    require_both_classes(cm);
    // F1 = 2TP / (2TP + FP + FN), per class with that class as positive.
    const double f1_fake = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
    const double f1_real = ratio(2 * cm.tn, 2 * cm.tn + cm.fn + cm.fp);
    return 100.0 * (f1_fake + f1_real) / 2.0;
}

double mcc(const ConfusionMatrix& cm) {
    const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
    const double tn = static_cast<double>(cm.tn), fn = static_cast<double>(cm.fn);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0.0) return 0.0;
    return 100.0 * (tp * tn - fp * fn) / std::sqrt(denom);
}

Dissection dissect(const ConfusionMatrix& cm) {
    return {static_cast<std::int64_t>(cm.fn), static_cast<std::int64_t>(cm.tp), static_cast<std::int64_t>(cm.tn),
            static_cast<std::int64_t>(cm.fp)};
}

ConfusionMatrix undissect(const Dissection& d) {
    return {static_cast<std::uint64_t>(d.right_fake), static_cast<std::uint64_t>(d.wrong_fake),
            static_cast<std::uint64_t>(d.right_real), static_cast<std::uint64_t>(d.wrong_real)};
}

double fake_only_accuracy(const ConfusionMatrix& cm) {
    if (cm.reals() != 0)
        throw Error(ErrorCode::RealSamplePresent, std::to_string(cm.reals()) + " real samples in a fake-only view");
    if (cm.fakes() == 0) throw Error(ErrorCode::MissingClass, "no fake ground-truth samples");
    return 100.0 * true_positive_rate(cm);
}

double fake_only_accuracy(std::span<const PredictionRecord> records) {
    for (const auto& r : records)
        if (r.true_label == Label::Real)
            throw Error(ErrorCode::RealSamplePresent, "record " + r.id + " is real");
    return fake_only_accuracy(confusion(records));
}

std::string_view to_string(View v) { return v == View::Paired ? "paired" : "fake_only"; }

BenchmarkScore score_benchmark(std::span<const PredictionRecord> records, std::optional<View> forced) {
    BenchmarkScore s;
    s.cm = confusion(records);
    if (!records.empty()) s.benchmark = records.front().benchmark;
    s.n0 = records.size();
    s.n_eff = static_cast<std::size_t>(s.cm.total());

    // View follows ground-truth composition over all records, parsed or not.
    bool any_real = false;
    for (const auto& r : records) any_real = any_real || r.true_label == Label::Real;
    const View natural = any_real ? View::Paired : View::FakeOnly;
    s.view = forced.value_or(natural);

    if (s.view == View::Paired) {
        s.ba = balanced_accuracy(s.cm);
        s.macro_f1 = macro_f1(s.cm);
        s.mcc = mcc(s.cm);
    } else {
        if (any_real) throw Error(ErrorCode::RealSamplePresent, "fake-only view requested on a set with reals");
        s.ba = fake_only_accuracy(s.cm);
    }
    return s;
}

std::map<std::string, BenchmarkScore> per_generator_scores(std::span<const PredictionRecord> records) {
    std::vector<const PredictionRecord*> reals;
    std::map<std::string, std::vector<const PredictionRecord*>> fakes;
    for (const auto& r : records) {
        if (r.true_label == Label::Real)
            reals.push_back(&r);
        else
            fakes[r.generator.value_or("unknown")].push_back(&r);
    }
    std::map<std::string, BenchmarkScore> out;
    for (const auto& [gen, members] : fakes) {
        std::vector<PredictionRecord> slice;
        slice.reserve(reals.size() + members.size());
        for (auto* r : reals) slice.push_back(*r);
        for (auto* r : members) slice.push_back(*r);
        BenchmarkScore s = score_benchmark(slice);
        s.benchmark += "/" + gen;
        out.emplace(gen, std::move(s));
    }
    return out;
}

BenchmarkScore mean_across_benchmarks(std::span<const BenchmarkScore> scores) {
    if (scores.empty()) throw Error(ErrorCode::EmptyList, "no scores to average");
    BenchmarkScore m;
    m.benchmark = "mean";
    bool all_f1 = true, all_mcc = true, all_paired = true;
    double f1 = 0.0, mc = 0.0;
    for (const auto& s : scores) {
        m.ba += s.ba;
        all_f1 = all_f1 && s.macro_f1.has_value();
        all_mcc = all_mcc && s.mcc.has_value();
        all_paired = all_paired && s.view == View::Paired;
        if (s.macro_f1) f1 += *s.macro_f1;
        if (s.mcc) mc += *s.mcc;
        m.n0 += s.n0;
        m.n_eff += s.n_eff;
    }
    const auto n = static_cast<double>(scores.size());
    m.ba /= n;
    if (all_f1) m.macro_f1 = f1 / n;
    if (all_mcc) m.mcc = mc / n;
    m.view = all_paired ? View::Paired : View::FakeOnly;
    return m;
}

namespace {

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return r;
}

} // namespace

SeedAggregate aggregate_seeds(std::span<const BenchmarkScore> per_seed) {
    if (per_seed.empty()) throw Error(ErrorCode::EmptyList, "no per-seed scores");
    std::vector<double> ba, f1, mc;
    for (const auto& s : per_seed) {
        ba.push_back(s.ba);
        if (s.macro_f1) f1.push_back(*s.macro_f1);
        if (s.mcc) mc.push_back(*s.mcc);
    }
    SeedAggregate a;
    a.seeds = per_seed.size();
    a.ba = mean_std(ba);
    if (f1.size() == per_seed.size()) a.macro_f1 = mean_std(f1);
    if (mc.size() == per_seed.size()) a.mcc = mean_std(mc);
    return a;
}

double round1(double value, Rounding mode) {
    constexpr double kGuard = 1e-9;
    const double scaled = value * 10.0;
    const double sign = scaled < 0 ? -1.0 : 1.0;
    const double mag = std::abs(scaled);
    const double r = mode == Rounding::Truncate ? std::floor(mag + kGuard) : std::floor(mag + 0.5 + kGuard);
    return sign * r / 10.0;
}

} // namespace gazekit
