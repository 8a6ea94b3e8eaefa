#include "ldm/effective_delay.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace ldm {

double penalty(const PenaltyParams& params, double deviation) {
    return params.early * std::max(0.0, -deviation) + params.late * std::max(0.0, deviation);
}

double effective_delay(const LoadingResult& result, const Network& net, const PenaltyParams& params, std::size_t path,
                       double t) {
    const double d = path_delay(result, net, path, t);
    return d + penalty(params, t + d - params.target);
}

std::pair<double, double> DelayField::cell(std::size_t i, double t0, double tf) const {
    const double lo = i == 0 ? t0 : 0.5 * (grid[i - 1] + grid[i]);
    const double hi = i + 1 == grid.size() ? tf : 0.5 * (grid[i] + grid[i + 1]);
    return {lo, hi};
}

DelayField delay_field(const LoadingResult& result, const Network& net, const PenaltyParams& params,
                       std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("delay_field: empty departure grid");
    DelayField field;
    field.grid.assign(grid.begin(), grid.end());
    const std::size_t np = net.paths().size();
    field.delay.assign(np, std::vector<double>(grid.size()));
    field.effective.assign(np, std::vector<double>(grid.size()));
    for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = grid[i];
            const double d = path_delay(result, net, p, t);
            field.delay[p][i] = d;
            field.effective[p][i] = d + penalty(params, t + d - params.target);
        }
    }
    field.od_min.assign(net.od_pairs().size(), std::numeric_limits<double>::infinity());
    for (std::size_t w = 0; w < net.od_pairs().size(); ++w) {
        for (std::size_t p : net.od_paths(w)) {
            const auto& psi = field.effective[p];
            field.od_min[w] = std::min(field.od_min[w], *std::min_element(psi.begin(), psi.end()));
        }
    }
    return field;
}

std::vector<double> uniform_grid(double t0, double tf, std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_grid: need at least one interval");
    if (!(tf > t0)) throw std::invalid_argument("uniform_grid: empty interval");
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = t0 + (tf - t0) * static_cast<double>(i) / static_cast<double>(n);
    g.back() = tf;
    return g;
}

std::vector<double> slot_midpoints(double t0, double tf, std::size_t n) {
    if (n == 0) throw std::invalid_argument("slot_midpoints: need at least one slot");
    if (!(tf > t0)) throw std::invalid_argument("slot_midpoints: empty interval");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = t0 + (tf - t0) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    }
    return g;
}

}  // namespace ldm
