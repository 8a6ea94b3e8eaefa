#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldm/effective_delay.hpp"
#include "ldm/flow.hpp"
#include "ldm/loader.hpp"
#include "ldm/network.hpp"

namespace ldm {

struct SolverConfig {
    double step_size = 1.0;
    /// Use step_size / k at iteration k instead of a fixed step.
    bool diminishing = false;
    int max_iters = 500;
    double gap_tol = 1e-6;
    /// Number of equal departure slots on [t0, tf].
    std::size_t slots = 20;
    LoadOptions loading;

    double step(int iteration) const { return diminishing ? step_size / iteration : step_size; }
};

struct SupportResidual {
    std::string path;
    double time = 0.0;    // slot midpoint
    double volume = 0.0;  // departures in the slot
    double residual = 0.0;  // Psi_p(t) - v_ij
};

struct IterationRecord {
    int iteration = 0;
    double gap = 0.0;
    double max_support_residual = 0.0;
    double step_length = 0.0;  // L2 distance to the previous iterate
};

struct EquilibriumCertificate {
    bool converged = false;
    int iterations = 0;
    double gap = 0.0;
    double gap_tol = 0.0;
    std::vector<double> od_min;
    std::vector<SupportResidual> residuals;
    double max_support_residual = 0.0;
    std::vector<IterationRecord> trace;
};

struct DueSolution {
    PathFlowVector flows;
    EquilibriumCertificate certificate;
};

/// Euclidean projection of vec onto { y >= 0 : sum_i w_i y_i = q }.
std::vector<double> project_od(std::span<const double> vec, std::span<const double> weights, double q);

/// Each OD's demand spread uniformly over its paths and [t0, tf], on the slot grid.
PathFlowVector initial_flows(const Network& net, const TimeHorizon& horizon, std::size_t slots);

/// Slot averages of h_p on `slots` equal slots.
std::vector<double> slot_rates(const StepFunction& f, const TimeHorizon& horizon, std::size_t slots);
StepFunction from_slot_rates(std::span<const double> rates, const TimeHorizon& horizon);

/// h' = P_Lambda(h - step * Psi(., h)), slot-wise per OD.
PathFlowVector fixed_point_step(const PathFlowVector& h, const DelayField& field, const Network& net,
                                const TimeHorizon& horizon, const SolverConfig& cfg, int iteration = 1);

/// sum_p int (Psi_p(t) - v_ij) h_p(t) dt with Psi_p held constant on each
/// grid point's nearest-sample cell. Throws if h is infeasible.
double gap(const PathFlowVector& h, const DelayField& field, const Network& net, const TimeHorizon& horizon);

/// Psi_p - v_ij on every cell where h_p carries volume.
std::vector<SupportResidual> support_residuals(const PathFlowVector& h, const DelayField& field, const Network& net,
                                               const TimeHorizon& horizon);

DueSolution solve_due(const Network& net, const PenaltyParams& params, const SolverConfig& cfg,
                      const TimeHorizon& horizon, std::optional<PathFlowVector> h0 = std::nullopt);

}  // namespace ldm
