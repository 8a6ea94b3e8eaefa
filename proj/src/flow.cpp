#include "ldm/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldm {

namespace {

std::vector<double> merged_grid(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    std::vector<double> dedup;
    dedup.reserve(out.size());
    for (double t : out) {
        if (dedup.empty() || t - dedup.back() > kTimeTol) dedup.push_back(t);
    }
    return dedup;
}

}  // namespace

TimeHorizon::TimeHorizon(double t0_, double tf_, double slack_) : t0(t0_), tf(tf_), slack(slack_) {
    if (!(t0 < tf)) throw std::invalid_argument("horizon requires t0 < tf");
    if (!(slack >= 0.0)) throw std::invalid_argument("horizon slack must be nonnegative");
}

// ---------------------------------------------------------------------------

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> rates)
    : breakpoints_(std::move(breakpoints)), rates_(std::move(rates)) {
    if (breakpoints_.empty() && rates_.empty()) return;
    if (breakpoints_.size() != rates_.size() + 1) {
        throw std::invalid_argument("step function needs len(rates) == len(breakpoints) - 1");
    }
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
        if (!(breakpoints_[i] < breakpoints_[i + 1])) {
            throw std::invalid_argument("step function breakpoints must be strictly increasing");
        }
    }
    for (double r : rates_) {
        if (!std::isfinite(r)) throw std::invalid_argument("step function rates must be finite");
    }
    normalize();
}

StepFunction StepFunction::constant(double from, double to, double rate) { return StepFunction({from, to}, {rate}); }

void StepFunction::normalize() {
    std::vector<double> b{breakpoints_.front()};
    std::vector<double> r;
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        const double end = breakpoints_[i + 1];
        if (end - b.back() <= kTimeTol) continue;
        if (!r.empty() && r.back() == rates_[i]) {
            b.back() = end;
        } else {
            r.push_back(rates_[i]);
            b.push_back(end);
        }
    }
    if (r.empty()) {
        breakpoints_.clear();
        rates_.clear();
        return;
    }
    breakpoints_ = std::move(b);
    rates_ = std::move(r);
}

double StepFunction::value(double t) const {
    if (rates_.empty() || t < breakpoints_.front() || t >= breakpoints_.back()) return 0.0;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return rates_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double StepFunction::integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < rates_.size(); ++i) s += rates_[i] * (breakpoints_[i + 1] - breakpoints_[i]);
    return s;
}

double StepFunction::integral(double from, double to) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        const double a = std::max(from, breakpoints_[i]);
        const double b = std::min(to, breakpoints_[i + 1]);
        if (b > a) s += rates_[i] * (b - a);
    }
    return s;
}

double StepFunction::min_rate() const {
    if (rates_.empty()) return 0.0;
    return *std::min_element(rates_.begin(), rates_.end());
}

double StepFunction::max_abs_rate() const {
    double m = 0.0;
    for (double r : rates_) m = std::max(m, std::abs(r));
    return m;
}

StepFunction StepFunction::combine(double a, const StepFunction& f, double b, const StepFunction& g) {
    const auto grid = merged_grid(f.breakpoints_, g.breakpoints_);
    if (grid.size() < 2) return {};
    std::vector<double> rates;
    rates.reserve(grid.size() - 1);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double mid = 0.5 * (grid[i] + grid[i + 1]);
        rates.push_back(a * f.value(mid) + b * g.value(mid));
    }
    return StepFunction(grid, std::move(rates));
}

StepFunction StepFunction::scaled(double c) const {
    if (empty()) return {};
    std::vector<double> r = rates_;
    for (double& x : r) x *= c;
    return StepFunction(breakpoints_, std::move(r));
}

StepFunction StepFunction::clipped_nonnegative() const {
    if (empty()) return {};
    std::vector<double> r = rates_;
    for (double& x : r) x = std::max(0.0, x);
    return StepFunction(breakpoints_, std::move(r));
}

StepFunction StepFunction::shifted(double dt) const {
    if (empty()) return {};
    std::vector<double> b = breakpoints_;
    for (double& t : b) t += dt;
    return StepFunction(std::move(b), rates_);
}

StepFunction StepFunction::restricted(double from, double to) const {
    std::vector<double> b;
    std::vector<double> r;
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        const double lo = std::max(from, breakpoints_[i]);
        const double hi = std::min(to, breakpoints_[i + 1]);
        if (hi - lo <= kTimeTol) continue;
        if (b.empty() || lo - b.back() > kTimeTol) {
            if (!b.empty()) r.push_back(0.0);
            b.push_back(lo);
        }
        r.push_back(rates_[i]);
        b.push_back(hi);
    }
    if (r.empty()) return {};
    return StepFunction(std::move(b), std::move(r));
}

double StepFunction::l2_distance_squared(const StepFunction& f, const StepFunction& g) {
    const auto grid = merged_grid(f.breakpoints_, g.breakpoints_);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double mid = 0.5 * (grid[i] + grid[i + 1]);
        const double d = f.value(mid) - g.value(mid);
        s += d * d * (grid[i + 1] - grid[i]);
    }
    return s;
}

// ---------------------------------------------------------------------------

CumulativeCurve::CumulativeCurve(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size()) throw std::invalid_argument("curve times/values size mismatch");
    if (times_.empty()) throw std::invalid_argument("curve needs at least one point");
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
        if (!(times_[i] < times_[i + 1])) throw std::invalid_argument("curve times must be strictly increasing");
        const double slack = 1e-12 * std::max(1.0, std::abs(values_[i]));
        if (values_[i + 1] < values_[i] - slack) throw std::invalid_argument("cumulative curve must be nondecreasing");
    }
}

CumulativeCurve CumulativeCurve::zero(double t0) { return CumulativeCurve({t0}, {0.0}); }

double CumulativeCurve::operator()(double t) const {
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return values_[i] + w * (values_[i + 1] - values_[i]);
}

double CumulativeCurve::next_breakpoint(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t + kTimeTol);
    return it == times_.end() ? std::numeric_limits<double>::infinity() : *it;
}

CumulativeCurve CumulativeCurve::normalized() const {
    std::vector<double> t{times_.front()};
    std::vector<double> v{values_.front()};
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (times_[i] - t.back() <= kTimeTol) {
            v.back() = std::max(v.back(), values_[i]);
            continue;
        }
        if (t.size() >= 2) {
            const std::size_t k = t.size() - 1;
            const double w = (t[k] - t[k - 1]) / (times_[i] - t[k - 1]);
            const double on_line = v[k - 1] + w * (values_[i] - v[k - 1]);
            if (std::abs(on_line - v[k]) <= 1e-12 * std::max(1.0, std::abs(v[k]))) {
                t.pop_back();
                v.pop_back();
            }
        }
        t.push_back(times_[i]);
        v.push_back(values_[i]);
    }
    return CumulativeCurve(std::move(t), std::move(v));
}

double CumulativeCurve::sup_distance(const CumulativeCurve& f, const CumulativeCurve& g) {
    const auto grid = merged_grid(f.times_, g.times_);
    double m = 0.0;
    for (double t : grid) m = std::max(m, std::abs(f(t) - g(t)));
    return m;
}

// ---------------------------------------------------------------------------

PathFlowVector PathFlowVector::zero(const Network& net) {
    PathFlowVector h;
    for (const auto& p : net.paths()) h.flows.push_back({p.id, {}});
    return h;
}

bool PathFlowVector::same_paths(const PathFlowVector& other) const {
    if (flows.size() != other.flows.size()) return false;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        if (flows[i].path != other.flows[i].path) return false;
    }
    return true;
}

CumulativeCurve cumulate(const StepFunction& rate, const TimeHorizon& horizon) {
    const StepFunction r = rate.restricted(horizon.t0, horizon.tf);
    std::vector<double> t{horizon.t0};
    std::vector<double> v{0.0};
    const auto& b = r.breakpoints();
    const auto& q = r.rates();
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (b[i] - t.back() > kTimeTol) {
            t.push_back(b[i]);
            v.push_back(acc);
        }
        acc += q[i] * (b[i + 1] - b[i]);
        t.push_back(b[i + 1]);
        v.push_back(acc);
    }
    return CumulativeCurve(std::move(t), std::move(v)).normalized();
}

double l2_distance(const PathFlowVector& h, const PathFlowVector& g) {
    if (!h.same_paths(g)) throw std::invalid_argument("l2_distance: path sets differ");
    double s = 0.0;
    for (std::size_t p = 0; p < h.size(); ++p) s += StepFunction::l2_distance_squared(h[p], g[p]);
    return std::sqrt(s);
}

double sup_distance(std::span<const double> f, std::span<const double> g) {
    if (f.empty()) throw std::invalid_argument("sup_distance: empty grid");
    if (f.size() != g.size()) throw std::invalid_argument("sup_distance: sample counts differ");
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g[i]));
    return m;
}

std::vector<double> od_volumes(const PathFlowVector& h, const Network& net) {
    std::vector<double> vol(net.od_pairs().size(), 0.0);
    for (std::size_t w = 0; w < vol.size(); ++w) {
        for (std::size_t p : net.od_paths(w)) vol[w] += h[p].integral();
    }
    return vol;
}

FeasibilityReport check_feasibility(const PathFlowVector& h, const Network& net, const TimeHorizon& horizon,
                                    double tol) {
    FeasibilityReport report;
    if (h.size() != net.paths().size()) {
        report.violations.push_back({"flows", "path count does not match network", 0.0});
        return report;
    }
    for (std::size_t p = 0; p < h.size(); ++p) {
        const auto& f = h[p];
        const std::string name = "path " + h.flows[p].path;
        if (h.flows[p].path != net.paths()[p].id) {
            report.violations.push_back({name, "flow does not match network path order", 0.0});
            continue;
        }
        if (f.min_rate() < 0.0) report.violations.push_back({name, "negative departure rate", -f.min_rate()});
        constexpr double inf = std::numeric_limits<double>::infinity();
        const double outside = f.restricted(-inf, horizon.t0).max_abs_rate() + f.restricted(horizon.tf, inf).max_abs_rate();
        if (outside > 0.0) report.violations.push_back({name, "departures outside the horizon", outside});
    }
    const auto vol = od_volumes(h, net);
    for (std::size_t w = 0; w < vol.size(); ++w) {
        const double q = net.demand(w);
        const double diff = std::abs(vol[w] - q);
        if (diff > tol * std::max(q, 1.0)) {
            const auto& od = net.od_pairs()[w];
            report.violations.push_back({"od (" + od.first + "," + od.second + ")", "volume differs from demand", diff});
        }
    }
    return report;
}

PathFlowVector renormalize(const PathFlowVector& h, const Network& net) {
    PathFlowVector out = h;
    const auto vol = od_volumes(h, net);
    for (std::size_t w = 0; w < vol.size(); ++w) {
        const double q = net.demand(w);
        if (vol[w] <= 0.0) {
            if (q > 0.0) throw std::invalid_argument("cannot renormalize an OD pair with zero volume");
            continue;
        }
        for (std::size_t p : net.od_paths(w)) out[p] = h[p].scaled(q / vol[w]);
    }
    return out;
}

PathFlowVector path_flows_from_json(const nlohmann::json& j, const Network& net) {
    PathFlowVector h = PathFlowVector::zero(net);
    for (const auto& f : j.at("flows")) {
        const std::size_t p = net.path_index(f.at("path").get<std::string>());
        h[p] = StepFunction(f.at("breakpoints").get<std::vector<double>>(), f.at("rates").get<std::vector<double>>());
    }
    return h;
}

nlohmann::json to_json(const PathFlowVector& h) {
    nlohmann::json flows = nlohmann::json::array();
    for (const auto& f : h.flows) {
        flows.push_back({{"path", f.path}, {"breakpoints", f.rate.breakpoints()}, {"rates", f.rate.rates()}});
    }
    return {{"flows", flows}};
}

}  // namespace ldm
