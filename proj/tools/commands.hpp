#pragma once

#include <CLI11.hpp>

#include <memory>
#include <string>
#include <vector>

namespace gazekit::cli {

/// Flags shared by every subcommand.
struct CommonOptions {
    std::uint64_t seed = 42;
    std::string out;
    std::vector<std::string> argv;
};

void add_compose(CLI::App& app, std::shared_ptr<CommonOptions> common);
void add_eval(CLI::App& app, std::shared_ptr<CommonOptions> common);
void add_split(CLI::App& app, std::shared_ptr<CommonOptions> common);
void add_mask(CLI::App& app, std::shared_ptr<CommonOptions> common);
void add_verify_pairs(CLI::App& app, std::shared_ptr<CommonOptions> common);
void add_select(CLI::App& app, std::shared_ptr<CommonOptions> common);
void add_gate(CLI::App& app, std::shared_ptr<CommonOptions> common);

/// Exit status set by a command that ran but found a failing check.
int& command_status();

} // namespace gazekit::cli
