#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ldm/flow.hpp"
#include "ldm/network.hpp"

namespace ldm {

/// Thrown when a query needs an exit time beyond the loaded horizon.
class HorizonExhausted : public std::runtime_error {
public:
    explicit HorizonExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// Piecewise-linear entry-time -> exit-time map of one arc.
///
/// Before the first breakpoint the arc is empty and tau(t) = t + beta. After
/// the last breakpoint the map continues with unit slope only when the arc
/// has drained; otherwise evaluation there throws HorizonExhausted.
class ExitTimeFunction {
public:
    ExitTimeFunction() = default;
    ExitTimeFunction(double beta, std::vector<double> times, std::vector<double> values, bool open_ended);

    static ExitTimeFunction free_flow(double beta, double t0);

    double operator()(double t) const;
    /// Entry time whose exit time is s.
    double inverse(double s) const;

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    double beta() const { return beta_; }
    bool open_ended() const { return open_ended_; }
    double valid_until() const { return times_.back(); }

    ExitTimeFunction normalized() const;

private:
    double beta_ = 1.0;
    std::vector<double> times_;
    std::vector<double> values_;
    bool open_ended_ = false;
};

/// Flow of one path through one arc. `hop` is the arc's position on the path.
struct CommodityState {
    std::string path;
    std::size_t hop = 0;
    CumulativeCurve entry;
    CumulativeCurve exit;
};

struct ArcState {
    std::string arc;
    CumulativeCurve entry;
    CumulativeCurve exit;
    ExitTimeFunction tau;
    std::vector<CommodityState> commodities;
    /// Time up to which the state is exact.
    double computed_until = 0.0;

    double volume(double t) const { return entry(t) - exit(t); }
};

struct LoadingResult {
    TimeHorizon horizon;
    std::vector<ArcState> arcs;
    /// Time by which all departed volume has exited, or the last loaded time.
    double loaded_until = 0.0;
    bool truncated = false;
    /// Volume still on each arc at loaded_until (all zero unless truncated).
    std::vector<double> residual;

    const ArcState& arc(const Network& net, const std::string& id) const { return arcs[net.arc_index(id)]; }
};

struct LoadOptions {
    /// Number of times the slack may be doubled when volume is still in the network.
    int max_extensions = 6;
};

/// 3 * sum of free-flow delays.
double default_slack(const Network& net);

/// Loads a single arc from its cumulative entry curve. The entry must be zero at t0.
std::pair<ExitTimeFunction, CumulativeCurve> load_arc(const Arc& arc, const CumulativeCurve& entry,
                                                      const TimeHorizon& horizon, const LoadOptions& opts = {});

/// Fills the commodity exits from tau using V^p = U^p o tau^{-1}.
ArcState split_commodities(ArcState state);

LoadingResult load_network(const Network& net, const PathFlowVector& h, const TimeHorizon& horizon,
                           const LoadOptions& opts = {});

double path_exit_time(const LoadingResult& result, const Network& net, std::size_t path, double t);
double path_exit_time(const LoadingResult& result, const Network& net, const std::string& path, double t);
double path_delay(const LoadingResult& result, const Network& net, std::size_t path, double t);
double path_delay(const LoadingResult& result, const Network& net, const std::string& path, double t);

}  // namespace ldm
