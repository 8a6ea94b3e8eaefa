#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ldm/effective_delay.hpp"
#include "ldm/flow.hpp"
#include "ldm/loader.hpp"
#include "ldm/network.hpp"

namespace ldm {

enum class SequenceMode {
    Scaled,           // h + 2^-n g
    SupportShift,     // h delayed by 2^-n * shift
    AmplitudeStress,  // tall spike of height A with the base's volume, then + 2^-n g
};

std::string to_string(SequenceMode mode);
SequenceMode sequence_mode_from_string(const std::string& s);

struct SequenceSpec {
    PathFlowVector base;
    SequenceMode mode = SequenceMode::Scaled;
    int length = 8;
    PathFlowVector direction;
    double amplitude = 1e4;
    double shift = 0.5;
};

struct SequenceTerm {
    PathFlowVector flows;
    /// Nonnegativity clipping (and the renormalization after it) was needed.
    bool clipped = false;
};

struct Sequence {
    /// The point the terms converge to; differs from spec.base in amplitude-stress mode.
    PathFlowVector limit;
    std::vector<SequenceTerm> terms;
};

/// Each path's volume packed into [s, s + v/A] at height A, where s is the
/// start of the path's support.
PathFlowVector amplitude_stress_base(const PathFlowVector& base, const TimeHorizon& horizon, double amplitude);

Sequence make_sequence(const SequenceSpec& spec, const Network& net, const TimeHorizon& horizon);

struct ConvergenceRow {
    int n = 0;
    double input_l2 = 0.0;
    /// max_p sup_t |H_p^(n) - H_p| of cumulative departures
    double sup_departures = 0.0;
    double sup_delay = 0.0;
    double sup_effective = 0.0;
    /// max_p of the per-path L2 distance of Psi_p on the grid
    double l2_effective = 0.0;
    std::vector<double> sup_delay_by_path;
    std::vector<double> sup_effective_by_path;
    bool clipped = false;
    bool truncated = false;
};

struct ConvergenceReport {
    double horizon_length = 0.0;
    std::vector<ConvergenceRow> rows;

    /// sup_effective at the last usable term over its value at the first.
    std::optional<double> final_to_initial() const;
    /// Max of sup_effective over the last quarter of terms over the max over the first quarter.
    std::optional<double> quarter_ratio() const;
};

ConvergenceReport convergence_report(const Network& net, const PenaltyParams& params, const SequenceSpec& spec,
                                     const TimeHorizon& horizon, const std::vector<double>& grid,
                                     const LoadOptions& opts = {});

struct MonotonicityViolation {
    std::string arc;
    std::size_t index = 0;
    std::string message;
};

struct MonotonicityAudit {
    std::vector<MonotonicityViolation> violations;
    /// Smallest slope over all pieces of all exit-time functions.
    double min_slope = 0.0;
    std::size_t breakpoints_checked = 0;

    bool passed() const { return violations.empty(); }
};

MonotonicityAudit monotonicity_audit(const LoadingResult& result, const Network& net);

}  // namespace ldm
