#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ldm {

class UnknownId : public std::invalid_argument {
public:
    explicit UnknownId(const std::string& what) : std::invalid_argument(what) {}
};

using NodeId = std::string;
using OdPair = std::pair<NodeId, NodeId>;

/// Arc with affine traversal time D(x) = alpha * x + beta.
struct Arc {
    std::string id;
    NodeId tail;
    NodeId head;
    double alpha = 0.0;
    double beta = 1.0;

    double delay(double volume) const { return alpha * volume + beta; }
};

struct Path {
    std::string id;
    OdPair od;
    std::vector<std::string> arcs;
};

struct Trip {
    OdPair od;
    double q = 0.0;
};

struct Issue {
    enum class Severity { Warning, Violation };
    Severity severity = Severity::Violation;
    std::string entity;
    std::string message;
};

struct ValidationReport {
    std::vector<Issue> issues;

    bool ok() const;
    std::vector<Issue> violations() const;
    std::vector<Issue> warnings() const;
    bool mentions(const std::string& text) const;
    std::string to_string() const;
};

/// Raw network description. Accepts anything; use validate() before
/// handing it to Network.
struct NetworkSpec {
    std::vector<NodeId> nodes;
    std::vector<Arc> arcs;
    std::vector<Path> paths;
    std::vector<Trip> trips;
};

ValidationReport validate(const NetworkSpec& spec);

/// Immutable, validated network with index-based lookups. Paths and arcs
/// keep the order in which they were declared.
class Network {
public:
    /// Throws std::invalid_argument carrying the report text if the spec has
    /// violations.
    explicit Network(NetworkSpec spec);

    const std::vector<NodeId>& nodes() const { return spec_.nodes; }
    const std::vector<Arc>& arcs() const { return spec_.arcs; }
    const std::vector<Path>& paths() const { return spec_.paths; }
    const std::vector<Trip>& trips() const { return spec_.trips; }
    const NetworkSpec& spec() const { return spec_; }

    std::size_t arc_index(const std::string& id) const;
    std::size_t path_index(const std::string& id) const;
    const Arc& arc(const std::string& id) const { return spec_.arcs[arc_index(id)]; }
    const Path& path(const std::string& id) const { return spec_.paths[path_index(id)]; }

    /// Arc indices along a path, in traversal order.
    const std::vector<std::size_t>& path_arcs(std::size_t p) const { return path_arcs_[p]; }

    int incidence(const std::string& arc, const std::string& path) const;

    /// Arcs that immediately precede `arc` on at least one path.
    std::set<std::string> upstream_arcs(const std::string& arc) const;

    /// OD pairs in trip-table order, with the path indices serving each.
    const std::vector<OdPair>& od_pairs() const { return od_pairs_; }
    const std::vector<std::size_t>& od_paths(std::size_t od) const { return od_paths_[od]; }
    double demand(std::size_t od) const { return spec_.trips[od].q; }
    std::size_t od_of_path(std::size_t p) const { return path_od_[p]; }

    double min_beta() const;
    double total_beta() const;

private:
    NetworkSpec spec_;
    std::map<std::string, std::size_t> arc_lookup_;
    std::map<std::string, std::size_t> path_lookup_;
    std::vector<std::vector<std::size_t>> path_arcs_;
    std::vector<OdPair> od_pairs_;
    std::vector<std::vector<std::size_t>> od_paths_;
    std::vector<std::size_t> path_od_;
};

NetworkSpec network_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NetworkSpec& spec);

}  // namespace ldm
