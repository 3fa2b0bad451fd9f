#pragma once

#include "gazekit/diagnostics.hpp"
#include "gazekit/metrics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace gazekit {

/// Scores of one model across benchmarks plus their unweighted mean.
struct ModelScores {
    std::string model;
    std::vector<BenchmarkScore> benchmarks;
    std::optional<BenchmarkScore> mean; // over paired-view benchmarks only
};

/// Builds per-benchmark scores and the mean for one model.
ModelScores score_model(const std::string& model, const std::vector<BenchmarkScore>& per_benchmark);

/// One decimal place, "-" for absent values.
std::string format1(std::optional<double> value, Rounding mode);

/// Machine-readable records: one per (model, benchmark) and one per mean.
/// Each metric is given raw and as the displayed one-decimal value.
nlohmann::json score_records(const std::vector<ModelScores>& models, Rounding mode);

/// Plain-text table, one row per model, BA / macro-F1 / MCC per benchmark
/// then the mean. Uses the same displayed values as score_records.
std::string render_score_table(const std::vector<ModelScores>& models, Rounding mode);

/// Plain-text table of dissection quadruples, with deltas against `base`
/// when given.
std::string render_dissection(const std::string& benchmark,
                              const std::vector<std::pair<std::string, ConfusionMatrix>>& models,
                              const std::string& base = {});

nlohmann::json to_json(const BenchmarkScore& s, Rounding mode);
nlohmann::json to_json(const Dissection& d);
nlohmann::json to_json(const ConfusionMatrix& cm);

std::string render_card_table(const std::vector<CardStats>& stats);
std::string render_wrong_pool(const WrongPoolReport& report);
std::string render_keyword_table(const KeywordStats& stats);

} // namespace gazekit
