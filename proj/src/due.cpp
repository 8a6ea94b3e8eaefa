#include "ldm/due.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ldm {

std::vector<double> project_od(std::span<const double> vec, std::span<const double> weights, double q) {
    if (vec.size() != weights.size()) throw std::invalid_argument("project_od: size mismatch");
    if (!(q >= 0.0)) throw std::invalid_argument("project_od: demand must be nonnegative");
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("project_od: weights must be positive");
    }
    const std::size_t n = vec.size();
    std::vector<double> y(n, 0.0);
    if (n == 0) {
        if (q > 0.0) throw std::invalid_argument("project_od: positive demand with no slots");
        return y;
    }
    if (q == 0.0) return y;

    // y_i = max(0, x_i - lambda * w_i); the weighted sum is decreasing in
    // lambda and linear between the kinks x_i / w_i.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return vec[a] / weights[a] > vec[b] / weights[b]; });
    double sum_wx = 0.0;
    double sum_ww = 0.0;
    double lambda = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        sum_wx += weights[i] * vec[i];
        sum_ww += weights[i] * weights[i];
        lambda = (sum_wx - q) / sum_ww;
        const double next_kink = k + 1 < n ? vec[order[k + 1]] / weights[order[k + 1]] : -INFINITY;
        if (lambda >= next_kink) break;
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = std::max(0.0, vec[i] - lambda * weights[i]);
    return y;
}

std::vector<double> slot_rates(const StepFunction& f, const TimeHorizon& horizon, std::size_t slots) {
    std::vector<double> r(slots);
    const double width = horizon.length() / static_cast<double>(slots);
    for (std::size_t k = 0; k < slots; ++k) {
        const double a = horizon.t0 + width * static_cast<double>(k);
        const double b = k + 1 == slots ? horizon.tf : horizon.t0 + width * static_cast<double>(k + 1);
        r[k] = f.integral(a, b) / (b - a);
    }
    return r;
}

StepFunction from_slot_rates(std::span<const double> rates, const TimeHorizon& horizon) {
    const auto grid = uniform_grid(horizon.t0, horizon.tf, rates.size());
    return StepFunction(grid, std::vector<double>(rates.begin(), rates.end()));
}

PathFlowVector initial_flows(const Network& net, const TimeHorizon& horizon, std::size_t slots) {
    PathFlowVector h = PathFlowVector::zero(net);
    for (std::size_t w = 0; w < net.od_pairs().size(); ++w) {
        const auto& paths = net.od_paths(w);
        const double rate = net.demand(w) / (static_cast<double>(paths.size()) * horizon.length());
        const std::vector<double> rates(slots, rate);
        for (std::size_t p : paths) h[p] = from_slot_rates(rates, horizon);
    }
    return h;
}

namespace {

std::size_t nearest_sample(const std::vector<double>& grid, double t) {
    auto it = std::lower_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) return 0;
    if (it == grid.end()) return grid.size() - 1;
    const auto i = static_cast<std::size_t>(it - grid.begin());
    return (t - grid[i - 1] <= grid[i] - t) ? i - 1 : i;
}

void require_feasible(const PathFlowVector& h, const Network& net, const TimeHorizon& horizon) {
    const auto report = check_feasibility(h, net, horizon, 1e-8);
    if (!report.feasible()) {
        const auto& v = report.violations.front();
        throw std::invalid_argument("infeasible path flows: " + v.entity + ": " + v.message);
    }
}

}  // namespace

PathFlowVector fixed_point_step(const PathFlowVector& h, const DelayField& field, const Network& net,
                                const TimeHorizon& horizon, const SolverConfig& cfg, int iteration) {
    const std::size_t n = cfg.slots;
    const auto mids = slot_midpoints(horizon.t0, horizon.tf, n);
    const double width = horizon.length() / static_cast<double>(n);
    const double step = cfg.step(iteration);

    PathFlowVector out = h;
    for (std::size_t w = 0; w < net.od_pairs().size(); ++w) {
        const auto& paths = net.od_paths(w);
        std::vector<double> shifted;
        shifted.reserve(paths.size() * n);
        for (std::size_t p : paths) {
            const auto rates = slot_rates(h[p], horizon, n);
            for (std::size_t k = 0; k < n; ++k) {
                shifted.push_back(rates[k] - step * field.effective[p][nearest_sample(field.grid, mids[k])]);
            }
        }
        const std::vector<double> weights(shifted.size(), width);
        const auto y = project_od(shifted, weights, net.demand(w));
        for (std::size_t j = 0; j < paths.size(); ++j) {
            out[paths[j]] = from_slot_rates(std::span(y).subspan(j * n, n), horizon);
        }
    }
    return out;
}

std::vector<SupportResidual> support_residuals(const PathFlowVector& h, const DelayField& field, const Network& net,
                                               const TimeHorizon& horizon) {
    std::vector<SupportResidual> out;
    for (std::size_t p = 0; p < net.paths().size(); ++p) {
        const double v = field.od_min[net.od_of_path(p)];
        for (std::size_t i = 0; i < field.grid.size(); ++i) {
            const auto [lo, hi] = field.cell(i, horizon.t0, horizon.tf);
            const double vol = h[p].integral(lo, hi);
            if (vol > 0.0) out.push_back({net.paths()[p].id, field.grid[i], vol, field.effective[p][i] - v});
        }
    }
    return out;
}

double gap(const PathFlowVector& h, const DelayField& field, const Network& net, const TimeHorizon& horizon) {
    require_feasible(h, net, horizon);
    double g = 0.0;
    for (const auto& r : support_residuals(h, field, net, horizon)) g += r.residual * r.volume;
    return g;
}

DueSolution solve_due(const Network& net, const PenaltyParams& params, const SolverConfig& cfg,
                      const TimeHorizon& horizon, std::optional<PathFlowVector> h0) {
    if (!(cfg.step_size > 0.0)) throw std::invalid_argument("solver step size must be positive");
    if (!(cfg.gap_tol >= 0.0)) throw std::invalid_argument("solver gap tolerance must be nonnegative");
    if (cfg.slots == 0) throw std::invalid_argument("solver needs at least one departure slot");

    PathFlowVector h = h0 ? std::move(*h0) : initial_flows(net, horizon, cfg.slots);
    require_feasible(h, net, horizon);
    const auto grid = slot_midpoints(horizon.t0, horizon.tf, cfg.slots);

    DueSolution sol;
    auto& cert = sol.certificate;
    cert.gap_tol = cfg.gap_tol;
    double last_step = 0.0;
    for (int it = 1;; ++it) {
        const LoadingResult loading = load_network(net, h, horizon, cfg.loading);
        const DelayField field = delay_field(loading, net, params, grid);
        const double g = gap(h, field, net, horizon);
        auto residuals = support_residuals(h, field, net, horizon);
        double max_res = 0.0;
        for (const auto& r : residuals) max_res = std::max(max_res, r.residual);

        cert.trace.push_back({it, g, max_res, last_step});
        cert.iterations = it;
        cert.gap = g;
        cert.od_min = field.od_min;
        cert.residuals = std::move(residuals);
        cert.max_support_residual = max_res;
        if (g <= cfg.gap_tol) {
            cert.converged = true;
            break;
        }
        if (it > cfg.max_iters) break;

        PathFlowVector next = fixed_point_step(h, field, net, horizon, cfg, it);
        last_step = l2_distance(next, h);
        h = std::move(next);
    }
    sol.flows = std::move(h);
    return sol;
}

}  // namespace ldm
