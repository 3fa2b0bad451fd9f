#pragma once

#include <json.hpp>

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gazekit {

/// One training-time evaluation point.
struct EvalSnapshot {
    std::int64_t step = 0;
    double eval_loss = 0.0;
    double eval_ba = 0.0; // fraction in [0, 1]
    std::optional<double> unique_output_ratio;
    std::optional<double> top1_template_ratio;
    std::optional<double> avg_gen_len;
};

/// Throws EmptyRun, or NonMonotonicSteps unless steps strictly increase.
void validate_run(std::span<const EvalSnapshot> snapshots);

/// Step with maximal eval_ba; ties go to the earliest step.
std::int64_t select_checkpoint(std::span<const EvalSnapshot> snapshots);

struct DecouplingReport {
    std::int64_t ba_best_step = 0;
    double ba_best = 0.0;
    std::int64_t loss_min_step = 0;
    double loss_min = 0.0;
    std::int64_t step_gap = 0; // |ba_best_step - loss_min_step|
};

/// Arg-max BA against arg-min loss, both tie-broken toward the earliest step.
DecouplingReport decoupling_report(std::span<const EvalSnapshot> snapshots);

nlohmann::json to_json(const EvalSnapshot& s);
nlohmann::json to_json(const DecouplingReport& r);

/// Line-delimited snapshot records {step, eval_loss,
/// eval_balanced_accuracy, unique_output_ratio?, top1_template_ratio?,
/// avg_gen_len?}. Throws SchemaError.
std::vector<EvalSnapshot> read_snapshots(std::istream& in);

/// Converts a trainer-state export (an object whose "log_history" array
/// holds per-step dicts). Entries for the same step are merged; steps that
/// never report both eval_loss and eval_balanced_accuracy are dropped.
std::vector<EvalSnapshot> snapshots_from_trainer_state(const nlohmann::json& state);

/// Reads either format, detected from the first non-blank character.
std::vector<EvalSnapshot> read_snapshot_file(const std::string& path);

} // namespace gazekit
