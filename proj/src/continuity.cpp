#include "ldm/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldm {

std::string to_string(SequenceMode mode) {
    switch (mode) {
        case SequenceMode::Scaled: return "scaled";
        case SequenceMode::SupportShift: return "support-shift";
        case SequenceMode::AmplitudeStress: return "amplitude-stress";
    }
    return "scaled";
}

SequenceMode sequence_mode_from_string(const std::string& s) {
    if (s == "scaled") return SequenceMode::Scaled;
    if (s == "support-shift") return SequenceMode::SupportShift;
    if (s == "amplitude-stress") return SequenceMode::AmplitudeStress;
    throw std::invalid_argument("unknown sequence mode: " + s);
}

PathFlowVector amplitude_stress_base(const PathFlowVector& base, const TimeHorizon& horizon, double amplitude) {
    if (!(amplitude > 0.0)) throw std::invalid_argument("spike amplitude must be positive");
    PathFlowVector out = base;
    for (auto& f : out.flows) {
        const double volume = f.rate.integral();
        if (volume <= 0.0) {
            f.rate = {};
            continue;
        }
        double start = horizon.t0;
        const auto& b = f.rate.breakpoints();
        const auto& r = f.rate.rates();
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (r[i] > 0.0) {
                start = b[i];
                break;
            }
        }
        const double width = volume / amplitude;
        if (start + width > horizon.tf) start = horizon.tf - width;
        if (start < horizon.t0) throw std::invalid_argument("spike does not fit in the horizon");
        f.rate = StepFunction::constant(start, start + width, amplitude);
    }
    return out;
}

namespace {

SequenceTerm keep_feasible(PathFlowVector h, const Network& net) {
    bool clipped = false;
    for (auto& f : h.flows) {
        if (f.rate.min_rate() < 0.0) {
            f.rate = f.rate.clipped_nonnegative();
            clipped = true;
        }
    }
    if (clipped) h = renormalize(h, net);
    return {std::move(h), clipped};
}

}  // namespace

Sequence make_sequence(const SequenceSpec& spec, const Network& net, const TimeHorizon& horizon) {
    const auto feas = check_feasibility(spec.base, net, horizon, 1e-9);
    if (!feas.feasible()) {
        throw std::invalid_argument("sequence base is infeasible: " + feas.violations.front().entity + ": " +
                                    feas.violations.front().message);
    }
    if (spec.length < 1) throw std::invalid_argument("sequence length must be positive");

    const bool uses_direction = spec.mode != SequenceMode::SupportShift;
    PathFlowVector g = spec.direction.flows.empty() ? PathFlowVector::zero(net) : spec.direction;
    if (uses_direction) {
        if (!g.same_paths(spec.base)) throw std::invalid_argument("perturbation does not match the base paths");
        const auto vol = od_volumes(g, net);
        for (std::size_t w = 0; w < vol.size(); ++w) {
            if (std::abs(vol[w]) > 1e-9 * std::max(1.0, net.demand(w))) {
                throw std::invalid_argument("perturbation must carry zero volume for every OD pair");
            }
        }
    }

    Sequence seq;
    seq.limit = spec.mode == SequenceMode::AmplitudeStress ? amplitude_stress_base(spec.base, horizon, spec.amplitude)
                                                           : spec.base;
    for (int n = 1; n <= spec.length; ++n) {
        const double scale = std::ldexp(1.0, -n);
        PathFlowVector term = seq.limit;
        if (uses_direction) {
            for (std::size_t p = 0; p < term.size(); ++p) term[p] = StepFunction::combine(1.0, seq.limit[p], scale, g[p]);
            seq.terms.push_back(keep_feasible(std::move(term), net));
        } else {
            bool lost = false;
            for (std::size_t p = 0; p < term.size(); ++p) {
                const double before = term[p].integral();
                term[p] = term[p].shifted(scale * spec.shift).restricted(horizon.t0, horizon.tf);
                lost = lost || term[p].integral() < before;
            }
            if (lost) term = renormalize(term, net);
            seq.terms.push_back({std::move(term), lost});
        }
    }
    return seq;
}

std::optional<double> ConvergenceReport::final_to_initial() const {
    const ConvergenceRow* first = nullptr;
    const ConvergenceRow* last = nullptr;
    for (const auto& r : rows) {
        if (r.truncated) continue;
        if (!first) first = &r;
        last = &r;
    }
    if (!first || first->sup_effective == 0.0) return std::nullopt;
    return last->sup_effective / first->sup_effective;
}

std::optional<double> ConvergenceReport::quarter_ratio() const {
    std::vector<double> s;
    for (const auto& r : rows) {
        if (!r.truncated) s.push_back(r.sup_effective);
    }
    if (s.size() < 4) return std::nullopt;
    const std::size_t q = s.size() / 4;
    const double head = *std::max_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(q));
    const double tail = *std::max_element(s.end() - static_cast<std::ptrdiff_t>(q), s.end());
    if (head == 0.0) return std::nullopt;
    return tail / head;
}

ConvergenceReport convergence_report(const Network& net, const PenaltyParams& params, const SequenceSpec& spec,
                                     const TimeHorizon& horizon, const std::vector<double>& grid,
                                     const LoadOptions& opts) {
    const Sequence seq = make_sequence(spec, net, horizon);
    const LoadingResult base_load = load_network(net, seq.limit, horizon, opts);
    if (base_load.truncated) throw std::runtime_error("base flow could not be fully loaded within the horizon");
    const DelayField base = delay_field(base_load, net, params, grid);

    std::vector<CumulativeCurve> base_cum;
    for (std::size_t p = 0; p < seq.limit.size(); ++p) base_cum.push_back(cumulate(seq.limit[p], horizon));

    // trapezoid weights; they sum to the grid's span
    std::vector<double> weight(grid.size(), 0.0);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double dt = grid[i + 1] - grid[i];
        weight[i] += 0.5 * dt;
        weight[i + 1] += 0.5 * dt;
    }

    ConvergenceReport report;
    report.horizon_length = horizon.length();
    int n = 0;
    for (const auto& term : seq.terms) {
        ConvergenceRow row;
        row.n = ++n;
        row.clipped = term.clipped;
        row.input_l2 = l2_distance(term.flows, seq.limit);
        for (std::size_t p = 0; p < term.flows.size(); ++p) {
            row.sup_departures =
                std::max(row.sup_departures, CumulativeCurve::sup_distance(cumulate(term.flows[p], horizon), base_cum[p]));
        }
        try {
            const LoadingResult load = load_network(net, term.flows, horizon, opts);
            row.truncated = load.truncated;
            if (!row.truncated) {
                const DelayField field = delay_field(load, net, params, grid);
                for (std::size_t p = 0; p < net.paths().size(); ++p) {
                    const double sd = sup_distance(field.delay[p], base.delay[p]);
                    const double se = sup_distance(field.effective[p], base.effective[p]);
                    double l2 = 0.0;
                    for (std::size_t i = 0; i < grid.size(); ++i) {
                        const double d = field.effective[p][i] - base.effective[p][i];
                        l2 += weight[i] * d * d;
                    }
                    row.sup_delay_by_path.push_back(sd);
                    row.sup_effective_by_path.push_back(se);
                    row.sup_delay = std::max(row.sup_delay, sd);
                    row.sup_effective = std::max(row.sup_effective, se);
                    row.l2_effective = std::max(row.l2_effective, std::sqrt(l2));
                }
            }
        } catch (const HorizonExhausted&) {
            row.truncated = true;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

MonotonicityAudit monotonicity_audit(const LoadingResult& result, const Network& net) {
    MonotonicityAudit audit;
    audit.min_slope = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < result.arcs.size(); ++a) {
        const ArcState& s = result.arcs[a];
        const double beta = net.arcs()[a].beta;
        const auto& t = s.tau.times();
        const auto& v = s.tau.values();
        for (std::size_t i = 0; i < t.size(); ++i) {
            ++audit.breakpoints_checked;
            if (v[i] < t[i] + beta) {
                audit.violations.push_back({s.arc, i, "exit time below free-flow exit time"});
            }
            if (i + 1 < t.size()) {
                if (!(v[i + 1] > v[i])) {
                    audit.violations.push_back({s.arc, i, "exit time function not strictly increasing"});
                }
                audit.min_slope = std::min(audit.min_slope, (v[i + 1] - v[i]) / (t[i + 1] - t[i]));
            }
        }
    }
    if (audit.min_slope == std::numeric_limits<double>::infinity()) audit.min_slope = 1.0;
    return audit;
}

}  // namespace ldm
