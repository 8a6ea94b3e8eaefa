#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ldm/loader.hpp"
#include "ldm/network.hpp"

namespace ldm {

/// Schedule-delay penalty F(x) = early * max(0, -x) + late * max(0, x),
/// where x is arrival time minus target.
struct PenaltyParams {
    double target = 0.0;
    double early = 0.0;
    double late = 0.0;

    double max_slope() const { return early > late ? early : late; }
};

double penalty(const PenaltyParams& params, double deviation);

double effective_delay(const LoadingResult& result, const Network& net, const PenaltyParams& params, std::size_t path,
                       double t);

/// Path delays and effective delays sampled on a departure grid.
struct DelayField {
    std::vector<double> grid;
    std::vector<std::vector<double>> delay;      // [path][grid index]
    std::vector<std::vector<double>> effective;  // [path][grid index]
    std::vector<double> od_min;                  // v_ij per trip-table entry

    /// Nearest-sample cell [lo, hi) of grid point i, clipped to [t0, tf].
    std::pair<double, double> cell(std::size_t i, double t0, double tf) const;
};

DelayField delay_field(const LoadingResult& result, const Network& net, const PenaltyParams& params,
                       std::span<const double> grid);

/// n + 1 evenly spaced points from t0 to tf inclusive.
std::vector<double> uniform_grid(double t0, double tf, std::size_t n);
/// Midpoints of n equal slots on [t0, tf].
std::vector<double> slot_midpoints(double t0, double tf, std::size_t n);

}  // namespace ldm
