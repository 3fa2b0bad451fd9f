#include "gazekit/selection.hpp"

#include "gazekit/error.hpp"
#include "gazekit/records.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace gazekit {

using nlohmann::json;

void validate_run(std::span<const EvalSnapshot> snapshots) {
    if (snapshots.empty()) throw Error(ErrorCode::EmptyRun, "no snapshots");
    for (std::size_t i = 1; i < snapshots.size(); ++i)
        if (snapshots[i].step <= snapshots[i - 1].step)
            throw Error(ErrorCode::NonMonotonicSteps,
                        "step " + std::to_string(snapshots[i].step) + " follows " + std::to_string(snapshots[i - 1].step));
}

std::int64_t select_checkpoint(std::span<const EvalSnapshot> snapshots) {
    return decoupling_report(snapshots).ba_best_step;
}

DecouplingReport decoupling_report(std::span<const EvalSnapshot> snapshots) {
    validate_run(snapshots);
    const EvalSnapshot* best_ba = &snapshots.front();
    const EvalSnapshot* best_loss = &snapshots.front();
    // Strict comparisons keep the earliest step on ties.
    for (const auto& s : snapshots) {
        if (s.eval_ba > best_ba->eval_ba) best_ba = &s;
        if (s.eval_loss < best_loss->eval_loss) best_loss = &s;
    }
    DecouplingReport r;
    r.ba_best_step = best_ba->step;
    r.ba_best = best_ba->eval_ba;
    r.loss_min_step = best_loss->step;
    r.loss_min = best_loss->eval_loss;
    r.step_gap = std::llabs(r.ba_best_step - r.loss_min_step);
    return r;
}

json to_json(const EvalSnapshot& s) {
    json j = {{"step", s.step}, {"eval_loss", s.eval_loss}, {"eval_balanced_accuracy", s.eval_ba}};
    if (s.unique_output_ratio) j["unique_output_ratio"] = *s.unique_output_ratio;
    if (s.top1_template_ratio) j["top1_template_ratio"] = *s.top1_template_ratio;
    if (s.avg_gen_len) j["avg_gen_len"] = *s.avg_gen_len;
    return j;
}

json to_json(const DecouplingReport& r) {
    return {{"ba_best_step", r.ba_best_step}, {"ba_best", r.ba_best},     {"loss_min_step", r.loss_min_step},
            {"loss_min", r.loss_min},         {"step_gap", r.step_gap}};
}

namespace {

std::optional<double> optional_number(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number()) throw SchemaError(line, std::string(key) + " must be a number");
    return j[key].get<double>();
}

EvalSnapshot snapshot_from_json(const json& j, std::size_t line) {
    if (!j.is_object()) throw SchemaError(line, "snapshot must be an object");
    if (!j.contains("step") || !j["step"].is_number_integer()) throw SchemaError(line, "step must be an integer");
    EvalSnapshot s;
    s.step = j["step"].get<std::int64_t>();
    auto loss = optional_number(j, "eval_loss", line);
    auto ba = optional_number(j, "eval_balanced_accuracy", line);
    if (!loss) throw SchemaError(line, "missing eval_loss");
    if (!ba) throw SchemaError(line, "missing eval_balanced_accuracy");
    if (*loss < 0 || !std::isfinite(*loss)) throw SchemaError(line, "eval_loss must be a non-negative number");
    if (*ba < 0 || *ba > 1) throw SchemaError(line, "eval_balanced_accuracy must lie in [0, 1]");
    s.eval_loss = *loss;
    s.eval_ba = *ba;
    s.unique_output_ratio = optional_number(j, "unique_output_ratio", line);
    s.top1_template_ratio = optional_number(j, "top1_template_ratio", line);
    s.avg_gen_len = optional_number(j, "avg_gen_len", line);
    return s;
}

} // namespace

std::vector<EvalSnapshot> read_snapshots(std::istream& in) {
    std::vector<EvalSnapshot> out;
    for_each_json_line(in, [&](const json& j, std::size_t line) { out.push_back(snapshot_from_json(j, line)); });
    return out;
}

std::vector<EvalSnapshot> snapshots_from_trainer_state(const json& state) {
    if (!state.is_object() || !state.contains("log_history") || !state["log_history"].is_array())
        throw Error(ErrorCode::SchemaViolation, "trainer state has no log_history array");
    std::map<std::int64_t, json> merged;
    for (const auto& entry : state["log_history"]) {
        if (!entry.is_object() || !entry.contains("step") || !entry["step"].is_number_integer()) continue;
        json& slot = merged[entry["step"].get<std::int64_t>()];
        for (const auto& [k, v] : entry.items()) slot[k] = v;
    }
    std::vector<EvalSnapshot> out;
    std::size_t index = 0;
    for (const auto& [step, j] : merged) {
        ++index;
        if (!j.contains("eval_loss") || !j.contains("eval_balanced_accuracy")) continue;
        out.push_back(snapshot_from_json(j, index));
    }
    return out;
}

std::vector<EvalSnapshot> read_snapshot_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();

    // A trainer-state export is one JSON object with log_history; anything
    // else is treated as line-delimited records.
    try {
        json doc = json::parse(content);
        if (doc.is_object() && doc.contains("log_history")) return snapshots_from_trainer_state(doc);
    } catch (const json::parse_error&) {
    }
    std::istringstream lines(content);
    return read_snapshots(lines);
}

} // namespace gazekit
