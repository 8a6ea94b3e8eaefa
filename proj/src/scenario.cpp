#include "ldm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ldm/export.hpp"

namespace fs = std::filesystem;

namespace ldm {

namespace {

nlohmann::json read_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ScenarioError(file.string() + ": cannot open file");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(file.string() + ": " + e.what());
    }
}

template <typename T>
T field_or(const nlohmann::json& obj, const char* key, T fallback, const fs::path& file, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(file.string() + ": field '" + where + "." + key + "': " + e.what());
    }
}

fs::path resolve(const fs::path& base, const std::string& ref) {
    fs::path p(ref);
    return p.is_absolute() ? p : base.parent_path() / p;
}

void write_file(const fs::path& file, const std::string& text) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw ScenarioError(file.string() + ": cannot write file");
    os << text;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// Portable uniform in [-1, 1) from the raw engine output.
double uniform_pm1(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

Network build_network(const Scenario& s) {
    const auto report = validate(s.network);
    if (!report.ok()) throw ScenarioError(s.network_file.string() + ": invalid network\n" + report.to_string());
    return Network(s.network);
}

PathFlowVector read_flows(const fs::path& file, const Network& net) {
    try {
        return path_flows_from_json(read_json(file), net);
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScenarioError(file.string() + ": " + e.what());
    }
}

}  // namespace

Scenario load_scenario(const fs::path& file) {
    const auto j = read_json(file);
    Scenario s;
    s.source = file;
    if (!j.contains("network")) throw ScenarioError(file.string() + ": missing field 'network'");
    s.network_file = resolve(file, j.at("network").get<std::string>());
    try {
        s.network = network_spec_from_json(read_json(s.network_file));
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScenarioError(s.network_file.string() + ": " + e.what());
    }
    if (j.contains("flows")) s.flows_file = resolve(file, j.at("flows").get<std::string>());

    if (!j.contains("horizon")) throw ScenarioError(file.string() + ": missing field 'horizon'");
    const auto& h = j.at("horizon");
    const double t0 = field_or(h, "t0", 0.0, file, "horizon");
    if (!h.contains("tf")) throw ScenarioError(file.string() + ": missing field 'horizon.tf'");
    const double tf = field_or(h, "tf", 1.0, file, "horizon");
    try {
        double slack = -1.0;
        slack = field_or(h, "slack", slack, file, "horizon");
        if (slack < 0.0) {
            double beta = 0.0;
            for (const auto& a : s.network.arcs) beta += a.beta;
            slack = 3.0 * beta;
        }
        s.horizon = TimeHorizon(t0, tf, slack);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(file.string() + ": field 'horizon': " + e.what());
    }

    const auto empty = nlohmann::json::object();
    const auto& pen = j.contains("penalty") ? j.at("penalty") : empty;
    s.penalty.target = field_or(pen, "target", 0.5 * (t0 + tf), file, "penalty");
    s.penalty.early = field_or(pen, "early", 0.0, file, "penalty");
    s.penalty.late = field_or(pen, "late", 0.0, file, "penalty");
    if (s.penalty.early < 0.0 || s.penalty.late < 0.0) {
        throw ScenarioError(file.string() + ": field 'penalty': coefficients must be nonnegative");
    }

    const auto& sol = j.contains("solver") ? j.at("solver") : empty;
    s.solver.step_size = field_or(sol, "step_size", s.solver.step_size, file, "solver");
    s.solver.diminishing = field_or(sol, "diminishing", s.solver.diminishing, file, "solver");
    s.solver.max_iters = field_or(sol, "max_iters", s.solver.max_iters, file, "solver");
    s.solver.gap_tol = field_or(sol, "gap_tol", s.solver.gap_tol, file, "solver");
    s.solver.slots = field_or(sol, "slots", s.solver.slots, file, "solver");
    if (!(s.solver.step_size > 0.0)) throw ScenarioError(file.string() + ": field 'solver.step_size' must be positive");
    if (!(s.solver.gap_tol >= 0.0)) throw ScenarioError(file.string() + ": field 'solver.gap_tol' must be nonnegative");
    if (s.solver.slots == 0) throw ScenarioError(file.string() + ": field 'solver.slots' must be positive");
    if (s.solver.max_iters < 0) throw ScenarioError(file.string() + ": field 'solver.max_iters' must be nonnegative");

    const auto& con = j.contains("continuity") ? j.at("continuity") : empty;
    try {
        s.continuity.mode = sequence_mode_from_string(field_or(con, "mode", std::string("scaled"), file, "continuity"));
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(file.string() + ": field 'continuity.mode': " + e.what());
    }
    s.continuity.length = field_or(con, "length", s.continuity.length, file, "continuity");
    s.continuity.amplitude = field_or(con, "amplitude", s.continuity.amplitude, file, "continuity");
    s.continuity.shift = field_or(con, "shift", s.continuity.shift, file, "continuity");
    if (con.contains("perturbation")) s.continuity.perturbation = resolve(file, con.at("perturbation").get<std::string>());

    if (j.contains("grid")) s.grid_points = field_or(j.at("grid"), "points", s.grid_points, file, "grid");
    if (s.grid_points < 2) throw ScenarioError(file.string() + ": field 'grid.points' must be at least 2");
    s.seed = field_or(j, "seed", std::uint64_t{0}, file, "scenario");
    return s;
}

PathFlowVector scenario_flows(const Scenario& s, const Network& net) {
    if (s.flows_file) return read_flows(*s.flows_file, net);
    return initial_flows(net, s.horizon, s.solver.slots);
}

PathFlowVector random_direction(const Network& net, const TimeHorizon& horizon, std::uint64_t seed,
                                std::size_t pieces) {
    std::mt19937_64 rng(seed);
    PathFlowVector g = PathFlowVector::zero(net);
    const auto grid = uniform_grid(horizon.t0, horizon.tf, pieces);
    for (std::size_t w = 0; w < net.od_pairs().size(); ++w) {
        const auto& paths = net.od_paths(w);
        std::vector<std::vector<double>> rates(paths.size(), std::vector<double>(pieces));
        double mean = 0.0;
        for (auto& r : rates) {
            for (double& x : r) {
                x = uniform_pm1(rng);
                mean += x;
            }
        }
        mean /= static_cast<double>(paths.size() * pieces);
        for (std::size_t j = 0; j < paths.size(); ++j) {
            for (double& x : rates[j]) x -= mean;
            g[paths[j]] = StepFunction(grid, rates[j]);
        }
    }
    const double norm = l2_distance(g, PathFlowVector::zero(net));
    if (norm > 0.0) {
        for (auto& f : g.flows) f.rate = f.rate.scaled(1.0 / norm);
    }
    return g;
}

ExitStatus run_load(const Scenario& s, const fs::path& out, std::ostream& err) {
    const Network net = build_network(s);
    const PathFlowVector h = scenario_flows(s, net);
    const auto feas = check_feasibility(h, net, s.horizon, 1e-9);
    if (!feas.feasible()) {
        const auto& v = feas.violations.front();
        throw ScenarioError((s.flows_file ? s.flows_file->string() : s.source.string()) + ": " + v.entity + ": " +
                            v.message);
    }
    const LoadingResult result = load_network(net, h, s.horizon, s.solver.loading);
    fs::create_directories(out);
    write_file(out / "loading.json", dump(to_json(result)));

    const auto audit = monotonicity_audit(result, net);
    write_file(out / "audit.json", dump(to_json(audit)));

    if (result.truncated) {
        err << "loading truncated at t = " << format_number(result.loaded_until) << "; residual volume remains\n";
    }
    try {
        const auto grid = uniform_grid(s.horizon.t0, s.horizon.tf, s.grid_points - 1);
        const DelayField field = delay_field(result, net, s.penalty, grid);
        std::ostringstream delays, od;
        write_delay_csv(delays, field, net);
        write_od_csv(od, field, net);
        write_file(out / "path_delays.csv", delays.str());
        write_file(out / "od_min.csv", od.str());
    } catch (const HorizonExhausted& e) {
        err << e.what() << "\n";
        return ExitStatus::HorizonError;
    }
    if (!audit.passed()) {
        err << "monotonicity audit failed\n";
        return ExitStatus::InternalError;
    }
    return ExitStatus::Ok;
}

ExitStatus run_due(const Scenario& s, const fs::path& out, std::ostream& err) {
    const Network net = build_network(s);
    DueSolution sol;
    try {
        sol = solve_due(net, s.penalty, s.solver, s.horizon);
    } catch (const HorizonExhausted& e) {
        err << e.what() << "\n";
        return ExitStatus::HorizonError;
    }
    fs::create_directories(out);
    write_file(out / "equilibrium.json", dump(to_json(sol.flows)));
    write_file(out / "certificate.json", dump(to_json(sol.certificate, net)));
    std::ostringstream log;
    write_convergence_csv(log, sol.certificate);
    write_file(out / "convergence.csv", log.str());
    if (!sol.certificate.converged) {
        err << "solver stopped after " << sol.certificate.iterations << " evaluations without reaching gap tolerance\n";
    }
    return ExitStatus::Ok;
}

ExitStatus run_continuity(const Scenario& s, const fs::path& out, std::ostream& err) {
    const Network net = build_network(s);
    SequenceSpec spec;
    spec.base = scenario_flows(s, net);
    spec.mode = s.continuity.mode;
    spec.length = s.continuity.length;
    spec.amplitude = s.continuity.amplitude;
    spec.shift = s.continuity.shift;
    spec.direction = s.continuity.perturbation ? read_flows(*s.continuity.perturbation, net)
                                               : random_direction(net, s.horizon, s.seed);
    const auto grid = uniform_grid(s.horizon.t0, s.horizon.tf, s.grid_points - 1);
    ConvergenceReport report;
    try {
        report = convergence_report(net, s.penalty, spec, s.horizon, grid, s.solver.loading);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(s.source.string() + ": field 'continuity': " + e.what());
    } catch (const HorizonExhausted& e) {
        err << e.what() << "\n";
        return ExitStatus::HorizonError;
    }
    fs::create_directories(out);
    std::ostringstream csv;
    write_report_csv(csv, report);
    write_file(out / "report.csv", csv.str());
    write_file(out / "report.json", dump(to_json(report, net)));
    for (const auto& r : report.rows) {
        if (r.truncated) err << "term " << r.n << " was truncated and is excluded from the ratios\n";
    }
    return ExitStatus::Ok;
}

ExitStatus run_command(const std::string& command, const fs::path& scenario, const fs::path& out,
                       std::optional<std::uint64_t> seed, std::ostream& err) {
    try {
        Scenario s = load_scenario(scenario);
        if (seed) s.seed = *seed;
        if (command == "load") return run_load(s, out, err);
        if (command == "due") return run_due(s, out, err);
        if (command == "continuity") return run_continuity(s, out, err);
        err << "unknown command: " << command << "\n";
        return ExitStatus::InputError;
    } catch (const ScenarioError& e) {
        err << "error: " << e.what() << "\n";
        return ExitStatus::InputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return ExitStatus::InternalError;
    }
}

}  // namespace ldm
