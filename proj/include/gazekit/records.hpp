#pragma once

#include "gazekit/label.hpp"
#include "gazekit/verdict.hpp"

#include <json.hpp>

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace gazekit {

/// One model output on one benchmark sample.
struct PredictionRecord {
    std::string id;
    std::string benchmark;
    Label true_label = Label::Real;
    std::string raw_output;
    Verdict verdict;
    std::optional<int> gen_len;
    std::optional<std::string> generator;
    std::optional<int> person_count;
    std::optional<std::string> model;

    bool correct() const {
        return verdict.parsed() &&
               (verdict.value == VerdictValue::Fake) == (true_label == Label::Fake);
    }
};

/// Validates one prediction-log record. Throws SchemaError carrying `line`.
PredictionRecord prediction_from_json(const nlohmann::json& j, std::size_t line);
nlohmann::json to_json(const PredictionRecord& r, bool include_verdict = false);

/// Reads a line-delimited prediction log. Blank lines are skipped; an input
/// with no records is a schema violation. Verdicts are left Unparseable;
/// call assign_verdicts.
std::vector<PredictionRecord> read_prediction_log(std::istream& in);
std::vector<PredictionRecord> read_prediction_log_file(const std::string& path);

void assign_verdicts(std::vector<PredictionRecord>& records, ParseMode mode, StrictOptions opts = {});

/// n0 = all records, n_eff = records whose verdict parsed.
EffectiveCount effective_counts(const std::vector<PredictionRecord>& records);

/// Calls `fn(json, line)` for each non-blank line; wraps parse errors.
template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn);

} // namespace gazekit

#include "gazekit/records_impl.hpp"
