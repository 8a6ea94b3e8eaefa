#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldm/network.hpp"

namespace ldm {

/// Absolute time tolerance used for breakpoint deduplication.
inline constexpr double kTimeTol = 1e-12;

struct TimeHorizon {
    double t0 = 0.0;
    double tf = 1.0;
    double slack = 0.0;

    TimeHorizon() = default;
    TimeHorizon(double t0, double tf, double slack = 0.0);

    double length() const { return tf - t0; }
    double end() const { return tf + slack; }
};

/// Piecewise-constant function: rates_[i] holds on [breakpoints_[i], breakpoints_[i+1]),
/// zero outside. Rates may be signed so the same type carries perturbation directions.
class StepFunction {
public:
    StepFunction() = default;
    StepFunction(std::vector<double> breakpoints, std::vector<double> rates);

    static StepFunction constant(double from, double to, double rate);

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& rates() const { return rates_; }
    bool empty() const { return rates_.empty(); }

    double value(double t) const;
    double integral() const;
    double integral(double from, double to) const;
    double min_rate() const;
    double max_abs_rate() const;

    /// a * f + b * g on the merged breakpoint grid.
    static StepFunction combine(double a, const StepFunction& f, double b, const StepFunction& g);
    StepFunction scaled(double c) const;
    StepFunction clipped_nonnegative() const;
    StepFunction shifted(double dt) const;
    /// Drops everything outside [from, to].
    StepFunction restricted(double from, double to) const;

    /// Exact integral of (f - g)^2.
    static double l2_distance_squared(const StepFunction& f, const StepFunction& g);

private:
    void normalize();

    std::vector<double> breakpoints_;
    std::vector<double> rates_;
};

/// Continuous piecewise-linear vehicle count, constant beyond both ends.
class CumulativeCurve {
public:
    CumulativeCurve() = default;
    /// Times must be strictly increasing and values nondecreasing (a small
    /// relative slack absorbs rounding in derived curves).
    CumulativeCurve(std::vector<double> times, std::vector<double> values);

    static CumulativeCurve zero(double t0);

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return times_.size(); }

    double operator()(double t) const;
    double final_value() const { return values_.empty() ? 0.0 : values_.back(); }
    /// Smallest breakpoint strictly greater than t + kTimeTol, or +inf.
    double next_breakpoint(double t) const;

    /// Merges collinear neighbours and drops zero-length pieces.
    CumulativeCurve normalized() const;

    /// Exact sup |f - g| over the merged breakpoint set.
    static double sup_distance(const CumulativeCurve& f, const CumulativeCurve& g);

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

struct PathFlow {
    std::string path;
    StepFunction rate;
};

/// Departure rates h_p for every path of a network, in network path order.
struct PathFlowVector {
    std::vector<PathFlow> flows;

    const StepFunction& operator[](std::size_t p) const { return flows[p].rate; }
    StepFunction& operator[](std::size_t p) { return flows[p].rate; }
    std::size_t size() const { return flows.size(); }

    static PathFlowVector zero(const Network& net);
    bool same_paths(const PathFlowVector& other) const;
};

CumulativeCurve cumulate(const StepFunction& rate, const TimeHorizon& horizon);

/// (sum_p int (h_p - g_p)^2 dt)^(1/2). Throws if the path sets differ.
double l2_distance(const PathFlowVector& h, const PathFlowVector& g);

/// max_i |f_i - g_i| over a common sample grid. Throws on empty or mismatched input.
double sup_distance(std::span<const double> f, std::span<const double> g);

struct FeasibilityViolation {
    std::string entity;
    std::string message;
    double magnitude = 0.0;
};

struct FeasibilityReport {
    std::vector<FeasibilityViolation> violations;
    bool feasible() const { return violations.empty(); }
};

/// Nonnegativity, support within [t0, tf], and per-OD volume within tol * Q.
FeasibilityReport check_feasibility(const PathFlowVector& h, const Network& net, const TimeHorizon& horizon,
                                    double tol = 1e-9);

/// Per-OD volume sum_{p in P_ij} int h_p.
std::vector<double> od_volumes(const PathFlowVector& h, const Network& net);

/// Rescales each OD's paths so their volumes sum to Q_ij again.
PathFlowVector renormalize(const PathFlowVector& h, const Network& net);

PathFlowVector path_flows_from_json(const nlohmann::json& j, const Network& net);
nlohmann::json to_json(const PathFlowVector& h);

}  // namespace ldm
