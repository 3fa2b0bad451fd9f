#include "gazekit/records.hpp"

#include <algorithm>
#include <fstream>

namespace gazekit {

using nlohmann::json;

namespace {

std::optional<int> optional_int(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number_integer()) throw SchemaError(line, std::string(key) + " must be an integer");
    return j[key].get<int>();
}

std::optional<std::string> optional_string(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw SchemaError(line, std::string(key) + " must be a string");
    return j[key].get<std::string>();
}

std::string required_string(const json& j, const char* key, std::size_t line) {
    auto v = optional_string(j, key, line);
    if (!v) throw SchemaError(line, std::string("missing required field ") + key);
    return *v;
}

} // namespace

PredictionRecord prediction_from_json(const json& j, std::size_t line) {
    if (!j.is_object()) throw SchemaError(line, "record must be an object");
    PredictionRecord r;
    r.id = required_string(j, "id", line);
    r.benchmark = required_string(j, "benchmark", line);
    const std::string label = required_string(j, "label", line);
    auto parsed = parse_label(label);
    if (!parsed) throw SchemaError(line, "label must be \"real\" or \"fake\", got \"" + label + "\"");
    r.true_label = *parsed;
    r.raw_output = required_string(j, "output", line);
    r.gen_len = optional_int(j, "gen_len", line);
    if (r.gen_len && *r.gen_len < 0) throw SchemaError(line, "gen_len must be non-negative");
    r.generator = optional_string(j, "generator", line);
    r.person_count = optional_int(j, "person_count", line);
    r.model = optional_string(j, "model", line);
    return r;
}

json to_json(const PredictionRecord& r, bool include_verdict) {
    json j = {{"id", r.id}, {"benchmark", r.benchmark}, {"label", to_string(r.true_label)}, {"output", r.raw_output}};
    if (r.gen_len) j["gen_len"] = *r.gen_len;
    if (r.generator) j["generator"] = *r.generator;
    if (r.person_count) j["person_count"] = *r.person_count;
    if (r.model) j["model"] = *r.model;
    if (include_verdict) {
        j["verdict"] = to_string(r.verdict.value);
        j["parse_mode"] = to_string(r.verdict.mode);
    }
    return j;
}

std::vector<PredictionRecord> read_prediction_log(std::istream& in) {
    std::vector<PredictionRecord> out;
    for_each_json_line(in, [&](const json& j, std::size_t line) { out.push_back(prediction_from_json(j, line)); });
    if (out.empty()) throw SchemaError(1, "prediction log contains no records");
    return out;
}

std::vector<PredictionRecord> read_prediction_log_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    try {
        return read_prediction_log(in);
    } catch (const SchemaError& e) {
        throw SchemaError(path, e.line(), e.detail());
    }
}

void assign_verdicts(std::vector<PredictionRecord>& records, ParseMode mode, StrictOptions opts) {
    for (auto& r : records) r.verdict = parse_verdict(r.raw_output, mode, opts);
}

EffectiveCount effective_counts(const std::vector<PredictionRecord>& records) {
    const auto n_eff = static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const PredictionRecord& r) { return r.verdict.parsed(); }));
    return effective_count(records.size(), n_eff);
}

} // namespace gazekit
