#include "commands.hpp"

#include "gazekit/error.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"gazekit: gaze-aware caption supervision, corpus scaffolding and evaluation"};
    app.set_version_flag("--version", GAZEKIT_VERSION);
    app.require_subcommand(1);

    auto common = std::make_shared<gazekit::cli::CommonOptions>();
    common->argv.assign(argv, argv + argc);

    gazekit::cli::add_compose(app, common);
    gazekit::cli::add_eval(app, common);
    gazekit::cli::add_split(app, common);
    gazekit::cli::add_mask(app, common);
    gazekit::cli::add_verify_pairs(app, common);
    gazekit::cli::add_select(app, common);
    gazekit::cli::add_gate(app, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const gazekit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return gazekit::cli::command_status();
}
