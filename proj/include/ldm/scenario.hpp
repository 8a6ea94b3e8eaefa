#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ldm/continuity.hpp"
#include "ldm/due.hpp"
#include "ldm/effective_delay.hpp"
#include "ldm/flow.hpp"
#include "ldm/network.hpp"

namespace ldm {

/// Bad input file: names the file and, when known, the offending field.
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

struct ContinuitySettings {
    SequenceMode mode = SequenceMode::Scaled;
    int length = 8;
    /// Perturbation direction file; a seeded random zero-volume direction is used when absent.
    std::optional<std::filesystem::path> perturbation;
    double amplitude = 1e4;
    double shift = 0.5;
};

struct Scenario {
    std::filesystem::path source;
    std::filesystem::path network_file;
    std::optional<std::filesystem::path> flows_file;
    NetworkSpec network;
    TimeHorizon horizon;
    PenaltyParams penalty;
    SolverConfig solver;
    ContinuitySettings continuity;
    std::size_t grid_points = 201;
    std::uint64_t seed = 0;
};

/// Relative file references resolve against the scenario file's directory.
Scenario load_scenario(const std::filesystem::path& file);

/// Departure flows for `load` and the continuity base: the flows file when
/// given, otherwise the solver's uniform initial spread.
PathFlowVector scenario_flows(const Scenario& s, const Network& net);

/// Seeded zero-volume perturbation with unit L2 norm.
PathFlowVector random_direction(const Network& net, const TimeHorizon& horizon, std::uint64_t seed,
                                std::size_t pieces = 8);

enum class ExitStatus : int { Ok = 0, InputError = 1, HorizonError = 2, InternalError = 3 };

/// Each runner writes its result files under `out` and returns a status;
/// errors are reported on `err`.
ExitStatus run_load(const Scenario& s, const std::filesystem::path& out, std::ostream& err);
ExitStatus run_due(const Scenario& s, const std::filesystem::path& out, std::ostream& err);
ExitStatus run_continuity(const Scenario& s, const std::filesystem::path& out, std::ostream& err);

/// Parses the scenario, applies the seed override and dispatches.
ExitStatus run_command(const std::string& command, const std::filesystem::path& scenario,
                       const std::filesystem::path& out, std::optional<std::uint64_t> seed, std::ostream& err);

}  // namespace ldm
