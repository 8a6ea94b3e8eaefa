#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ldm/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Link delay model network loading, DUE solver and continuity experiments"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    for (const char* name : {"load", "due", "continuity"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--scenario", scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--seed", seed, "override the scenario's random seed");
    }
    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    return static_cast<int>(ldm::run_command(command, scenario, out, seed, std::cerr));
}
