#include "ldm/export.hpp"

#include <fmt/format.h>

namespace ldm {

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

nlohmann::json to_json(const CumulativeCurve& c) { return {{"times", c.times()}, {"values", c.values()}}; }

nlohmann::json to_json(const ExitTimeFunction& tau) {
    return {{"beta", tau.beta()}, {"times", tau.times()}, {"values", tau.values()}, {"open_ended", tau.open_ended()}};
}

nlohmann::json to_json(const LoadingResult& result) {
    nlohmann::json arcs = nlohmann::json::array();
    for (std::size_t a = 0; a < result.arcs.size(); ++a) {
        const ArcState& s = result.arcs[a];
        nlohmann::json commodities = nlohmann::json::array();
        for (const auto& c : s.commodities) {
            commodities.push_back({{"path", c.path}, {"hop", c.hop}, {"entry", to_json(c.entry)}, {"exit", to_json(c.exit)}});
        }
        arcs.push_back({{"id", s.arc},
                        {"computed_until", s.computed_until},
                        {"residual", result.residual[a]},
                        {"entry", to_json(s.entry)},
                        {"exit", to_json(s.exit)},
                        {"tau", to_json(s.tau)},
                        {"commodities", commodities}});
    }
    return {{"t0", result.horizon.t0},
            {"tf", result.horizon.tf},
            {"loaded_until", result.loaded_until},
            {"truncated", result.truncated},
            {"arcs", arcs}};
}

nlohmann::json to_json(const MonotonicityAudit& audit) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& x : audit.violations) v.push_back({{"arc", x.arc}, {"index", x.index}, {"message", x.message}});
    return {{"passed", audit.passed()},
            {"breakpoints_checked", audit.breakpoints_checked},
            {"min_slope", audit.min_slope},
            {"violations", v}};
}

nlohmann::json to_json(const EquilibriumCertificate& cert, const Network& net) {
    nlohmann::json od = nlohmann::json::array();
    for (std::size_t w = 0; w < cert.od_min.size(); ++w) {
        const auto& pair = net.od_pairs()[w];
        od.push_back({{"od", {pair.first, pair.second}}, {"v", cert.od_min[w]}});
    }
    nlohmann::json res = nlohmann::json::array();
    for (const auto& r : cert.residuals) {
        res.push_back({{"path", r.path}, {"time", r.time}, {"volume", r.volume}, {"residual", r.residual}});
    }
    return {{"converged", cert.converged},
            {"iterations", cert.iterations},
            {"gap", cert.gap},
            {"gap_tol", cert.gap_tol},
            {"max_support_residual", cert.max_support_residual},
            {"od_min", od},
            {"residuals", res}};
}

nlohmann::json to_json(const ConvergenceReport& report, const Network& net) {
    nlohmann::json series = nlohmann::json::object();
    std::vector<int> n;
    std::vector<double> l2, sup_h, sup_d, sup_psi, l2_psi;
    std::vector<bool> clipped, truncated;
    for (const auto& r : report.rows) {
        n.push_back(r.n);
        l2.push_back(r.input_l2);
        sup_h.push_back(r.sup_departures);
        sup_d.push_back(r.sup_delay);
        sup_psi.push_back(r.sup_effective);
        l2_psi.push_back(r.l2_effective);
        clipped.push_back(r.clipped);
        truncated.push_back(r.truncated);
    }
    nlohmann::json by_path = nlohmann::json::array();
    for (std::size_t p = 0; p < net.paths().size(); ++p) {
        std::vector<double> d, e;
        for (const auto& r : report.rows) {
            d.push_back(r.truncated ? 0.0 : r.sup_delay_by_path[p]);
            e.push_back(r.truncated ? 0.0 : r.sup_effective_by_path[p]);
        }
        by_path.push_back({{"path", net.paths()[p].id}, {"sup_D", d}, {"sup_Psi", e}});
    }
    nlohmann::json j = {{"horizon_length", report.horizon_length},
                        {"n", n},
                        {"input_l2", l2},
                        {"sup_departures", sup_h},
                        {"sup_D", sup_d},
                        {"sup_Psi", sup_psi},
                        {"l2_Psi", l2_psi},
                        {"clipped", clipped},
                        {"truncated", truncated},
                        {"by_path", by_path}};
    if (auto r = report.final_to_initial()) j["final_to_initial"] = *r;
    if (auto r = report.quarter_ratio()) j["quarter_ratio"] = *r;
    return j;
}

void write_delay_csv(std::ostream& os, const DelayField& field, const Network& net) {
    os << "path_id,departure_time,delay,effective_delay\n";
    for (std::size_t p = 0; p < net.paths().size(); ++p) {
        for (std::size_t i = 0; i < field.grid.size(); ++i) {
            os << net.paths()[p].id << ',' << format_number(field.grid[i]) << ',' << format_number(field.delay[p][i])
               << ',' << format_number(field.effective[p][i]) << '\n';
        }
    }
}

void write_od_csv(std::ostream& os, const DelayField& field, const Network& net) {
    os << "origin,destination,v\n";
    for (std::size_t w = 0; w < field.od_min.size(); ++w) {
        os << net.od_pairs()[w].first << ',' << net.od_pairs()[w].second << ',' << format_number(field.od_min[w]) << '\n';
    }
}

void write_convergence_csv(std::ostream& os, const EquilibriumCertificate& cert) {
    os << "iteration,gap,max_support_residual,l2_step\n";
    for (const auto& r : cert.trace) {
        os << r.iteration << ',' << format_number(r.gap) << ',' << format_number(r.max_support_residual) << ','
           << format_number(r.step_length) << '\n';
    }
}

void write_report_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "n,input_l2,sup_D,sup_Psi,l2_Psi,clipped,truncated\n";
    for (const auto& r : report.rows) {
        os << r.n << ',' << format_number(r.input_l2) << ',' << format_number(r.sup_delay) << ','
           << format_number(r.sup_effective) << ',' << format_number(r.l2_effective) << ',' << (r.clipped ? 1 : 0) << ','
           << (r.truncated ? 1 : 0) << '\n';
    }
}

}  // namespace ldm
