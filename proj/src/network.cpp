#include "ldm/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ldm {

namespace {

std::string od_name(const OdPair& od) { return "(" + od.first + "," + od.second + ")"; }

}  // namespace

bool ValidationReport::ok() const { return violations().empty(); }

std::vector<Issue> ValidationReport::violations() const {
    std::vector<Issue> out;
    std::copy_if(issues.begin(), issues.end(), std::back_inserter(out),
                 [](const Issue& i) { return i.severity == Issue::Severity::Violation; });
    return out;
}

std::vector<Issue> ValidationReport::warnings() const {
    std::vector<Issue> out;
    std::copy_if(issues.begin(), issues.end(), std::back_inserter(out),
                 [](const Issue& i) { return i.severity == Issue::Severity::Warning; });
    return out;
}

bool ValidationReport::mentions(const std::string& text) const {
    return std::any_of(issues.begin(), issues.end(), [&](const Issue& i) {
        return i.message.find(text) != std::string::npos || i.entity.find(text) != std::string::npos;
    });
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& i : issues) {
        os << (i.severity == Issue::Severity::Violation ? "error: " : "warning: ") << i.entity
           << ": " << i.message << "\n";
    }
    return os.str();
}

ValidationReport validate(const NetworkSpec& spec) {
    ValidationReport report;
    auto violation = [&](std::string entity, std::string msg) {
        report.issues.push_back({Issue::Severity::Violation, std::move(entity), std::move(msg)});
    };
    auto warning = [&](std::string entity, std::string msg) {
        report.issues.push_back({Issue::Severity::Warning, std::move(entity), std::move(msg)});
    };

    std::set<NodeId> nodes;
    for (const auto& n : spec.nodes) {
        if (!nodes.insert(n).second) violation("node " + n, "duplicate node id");
    }

    std::map<std::string, const Arc*> arcs;
    for (const auto& a : spec.arcs) {
        const std::string name = "arc " + a.id;
        if (!arcs.emplace(a.id, &a).second) violation(name, "duplicate arc id");
        if (!nodes.count(a.tail)) violation(name, "unknown tail node " + a.tail);
        if (!nodes.count(a.head)) violation(name, "unknown head node " + a.head);
        if (!std::isfinite(a.beta) || !(a.beta > 0.0)) violation(name, "beta must be strictly positive");
        if (!std::isfinite(a.alpha) || !(a.alpha >= 0.0)) violation(name, "alpha must be nonnegative");
    }

    std::set<std::string> path_ids;
    std::set<OdPair> served;
    for (const auto& p : spec.paths) {
        const std::string name = "path " + p.id;
        if (!path_ids.insert(p.id).second) violation(name, "duplicate path id");
        if (p.arcs.empty()) {
            violation(name, "path has no arcs");
            continue;
        }
        bool all_known = true;
        for (const auto& a : p.arcs) {
            if (!arcs.count(a)) {
                violation(name, "unknown arc " + a);
                all_known = false;
            }
        }
        if (!all_known) continue;
        for (std::size_t k = 0; k + 1 < p.arcs.size(); ++k) {
            const Arc& cur = *arcs.at(p.arcs[k]);
            const Arc& next = *arcs.at(p.arcs[k + 1]);
            if (cur.head != next.tail) {
                violation(name, "arcs " + cur.id + " and " + next.id + " are not connected head-to-tail");
            }
        }
        if (arcs.at(p.arcs.front())->tail != p.od.first) {
            violation(name, "first arc does not leave origin " + p.od.first);
        }
        if (arcs.at(p.arcs.back())->head != p.od.second) {
            violation(name, "last arc does not reach destination " + p.od.second);
        }
        std::set<NodeId> visited{arcs.at(p.arcs.front())->tail};
        for (const auto& a : p.arcs) {
            if (!visited.insert(arcs.at(a)->head).second) {
                warning(name, "path revisits node " + arcs.at(a)->head);
                break;
            }
        }
        served.insert(p.od);
    }

    std::set<OdPair> trip_ods;
    for (const auto& t : spec.trips) {
        const std::string name = "trip " + od_name(t.od);
        if (!trip_ods.insert(t.od).second) violation(name, "duplicate trip-table entry");
        if (!std::isfinite(t.q) || t.q < 0.0) violation(name, "demand must be nonnegative");
        if (!served.count(t.od)) violation(name, "no path connects this OD pair");
    }
    for (const auto& p : spec.paths) {
        if (!trip_ods.count(p.od)) violation("path " + p.id, "OD pair " + od_name(p.od) + " has no trip-table entry");
    }
    return report;
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
    const auto report = validate(spec_);
    if (!report.ok()) throw std::invalid_argument("invalid network:\n" + report.to_string());

    for (std::size_t i = 0; i < spec_.arcs.size(); ++i) arc_lookup_[spec_.arcs[i].id] = i;
    for (std::size_t i = 0; i < spec_.paths.size(); ++i) path_lookup_[spec_.paths[i].id] = i;

    path_arcs_.reserve(spec_.paths.size());
    for (const auto& p : spec_.paths) {
        std::vector<std::size_t> idx;
        idx.reserve(p.arcs.size());
        for (const auto& a : p.arcs) idx.push_back(arc_lookup_.at(a));
        path_arcs_.push_back(std::move(idx));
    }

    od_paths_.resize(spec_.trips.size());
    path_od_.resize(spec_.paths.size());
    for (std::size_t w = 0; w < spec_.trips.size(); ++w) {
        od_pairs_.push_back(spec_.trips[w].od);
        for (std::size_t p = 0; p < spec_.paths.size(); ++p) {
            if (spec_.paths[p].od == spec_.trips[w].od) {
                od_paths_[w].push_back(p);
                path_od_[p] = w;
            }
        }
    }
}

std::size_t Network::arc_index(const std::string& id) const {
    auto it = arc_lookup_.find(id);
    if (it == arc_lookup_.end()) throw UnknownId("unknown arc id: " + id);
    return it->second;
}

std::size_t Network::path_index(const std::string& id) const {
    auto it = path_lookup_.find(id);
    if (it == path_lookup_.end()) throw UnknownId("unknown path id: " + id);
    return it->second;
}

int Network::incidence(const std::string& arc, const std::string& path) const {
    arc_index(arc);
    const auto& arcs = spec_.paths[path_index(path)].arcs;
    return std::find(arcs.begin(), arcs.end(), arc) != arcs.end() ? 1 : 0;
}

std::set<std::string> Network::upstream_arcs(const std::string& arc) const {
    arc_index(arc);
    std::set<std::string> out;
    for (const auto& p : spec_.paths) {
        for (std::size_t k = 1; k < p.arcs.size(); ++k) {
            if (p.arcs[k] == arc) out.insert(p.arcs[k - 1]);
        }
    }
    return out;
}

double Network::min_beta() const {
    double m = spec_.arcs.front().beta;
    for (const auto& a : spec_.arcs) m = std::min(m, a.beta);
    return m;
}

double Network::total_beta() const {
    return std::accumulate(spec_.arcs.begin(), spec_.arcs.end(), 0.0,
                           [](double s, const Arc& a) { return s + a.beta; });
}

NetworkSpec network_spec_from_json(const nlohmann::json& j) {
    auto od = [](const nlohmann::json& v) {
        if (!v.is_array() || v.size() != 2) throw std::invalid_argument("od must be a two-element array");
        return OdPair{v.at(0).get<std::string>(), v.at(1).get<std::string>()};
    };
    NetworkSpec spec;
    for (const auto& n : j.at("nodes")) spec.nodes.push_back(n.get<std::string>());
    for (const auto& a : j.at("arcs")) {
        spec.arcs.push_back({a.at("id").get<std::string>(), a.at("tail").get<std::string>(),
                             a.at("head").get<std::string>(), a.at("alpha").get<double>(),
                             a.at("beta").get<double>()});
    }
    for (const auto& p : j.at("paths")) {
        spec.paths.push_back({p.at("id").get<std::string>(), od(p.at("od")),
                              p.at("arcs").get<std::vector<std::string>>()});
    }
    for (const auto& t : j.at("trips")) spec.trips.push_back({od(t.at("od")), t.at("q").get<double>()});
    return spec;
}

nlohmann::json to_json(const NetworkSpec& spec) {
    nlohmann::json j;
    j["nodes"] = spec.nodes;
    j["arcs"] = nlohmann::json::array();
    for (const auto& a : spec.arcs) {
        j["arcs"].push_back({{"id", a.id}, {"tail", a.tail}, {"head", a.head}, {"alpha", a.alpha}, {"beta", a.beta}});
    }
    j["paths"] = nlohmann::json::array();
    for (const auto& p : spec.paths) {
        j["paths"].push_back({{"id", p.id}, {"od", {p.od.first, p.od.second}}, {"arcs", p.arcs}});
    }
    j["trips"] = nlohmann::json::array();
    for (const auto& t : spec.trips) j["trips"].push_back({{"od", {t.od.first, t.od.second}}, {"q", t.q}});
    return j;
}

}  // namespace ldm
