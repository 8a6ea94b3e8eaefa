#include "ldm/loader.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <queue>

namespace ldm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, std::size_t i, double x) {
    const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + w * (ys[i + 1] - ys[i]);
}

/// Incremental exact loader for one arc.
///
/// Breakpoints of tau are the entry breakpoints plus the exit events tau(b)
/// of earlier breakpoints b. Since tau(b) >= b + beta, tau on [b_k, b_{k+1}]
/// only needs the part of tau already built. The last stored point may be a
/// provisional tail at a window end; it lies on the current linear piece and
/// is dropped at the next advance.
class ArcLoader {
public:
    struct Source {
        const CumulativeCurve* curve = nullptr;
        const ArcLoader* upstream = nullptr;
        std::size_t commodity = 0;
    };

    ArcLoader(const Arc& arc, double t0) : arc_(arc), t0_(t0) {
        t_.push_back(t0);
        tau_.push_back(t0 + arc.beta);
        utot_.push_back(0.0);
        pending_.push(tau_.back());
    }

    std::size_t add_source(Source s) {
        src_.push_back(s);
        u_.push_back({source_value(src_.size() - 1, t0_)});
        if (u_.back().front() != 0.0) throw std::invalid_argument("arc " + arc_.id + ": entry curve must start at zero");
        return src_.size() - 1;
    }

    void advance(double until) {
        if (tail_) pop_point();
        for (;;) {
            const double last = t_.back();
            while (!pending_.empty() && pending_.top() <= last + kTimeTol) pending_.pop();
            double e = pending_.empty() ? kInf : pending_.top();
            for (std::size_t c = 0; c < src_.size(); ++c) e = std::min(e, source_next(c, last));
            if (e > until + kTimeTol) break;
            push_point(e);
            pending_.push(tau_.back());
        }
        if (until - t_.back() > kTimeTol) {
            push_point(until);
            tail_ = true;
        }
    }

    double through() const { return t_.back(); }
    double exit_known_until() const { return tau_.back(); }

    double entry_known_until() const {
        double k = kInf;
        for (std::size_t c = 0; c < src_.size(); ++c) {
            if (src_[c].upstream) k = std::min(k, src_[c].upstream->exit_known_until());
        }
        return k;
    }

    double commodity_exit(std::size_t c, double s) const { return exit_value(u_[c], s); }
    double total_exit(double s) const { return exit_value(utot_, s); }
    double total_entry() const { return utot_.back(); }

    /// Next exit breakpoint after `after`; +inf when none is known yet.
    double next_exit_breakpoint(double after) const {
        const std::size_t confirmed = tail_ ? tau_.size() - 1 : tau_.size();
        auto end = tau_.begin() + static_cast<std::ptrdiff_t>(confirmed);
        auto it = std::upper_bound(tau_.begin(), end, after + kTimeTol);
        return it == end ? kInf : *it;
    }

    ArcState export_state(const std::vector<std::pair<std::string, std::size_t>>& keys, bool drained) const {
        ArcState s;
        s.arc = arc_.id;
        s.entry = CumulativeCurve(t_, utot_).normalized();
        s.exit = exit_curve(utot_);
        s.tau = ExitTimeFunction(arc_.beta, t_, tau_, drained).normalized();
        s.computed_until = t_.back();
        for (std::size_t c = 0; c < src_.size(); ++c) {
            s.commodities.push_back(
                {keys[c].first, keys[c].second, CumulativeCurve(t_, u_[c]).normalized(), exit_curve(u_[c])});
        }
        return s;
    }

private:
    double source_value(std::size_t c, double t) const {
        const Source& s = src_[c];
        return s.curve ? (*s.curve)(t) : s.upstream->commodity_exit(s.commodity, t);
    }

    double source_next(std::size_t c, double after) const {
        const Source& s = src_[c];
        return s.curve ? s.curve->next_breakpoint(after) : s.upstream->next_exit_breakpoint(after);
    }

    double exit_value(const std::vector<double>& counts, double s) const {
        if (s <= tau_.front()) return 0.0;
        if (s >= tau_.back()) {
            if (s > tau_.back() + kTimeTol) {
                throw std::logic_error("arc " + arc_.id + ": exit queried beyond the computed exit times");
            }
            return counts.back();
        }
        auto it = std::upper_bound(tau_.begin(), tau_.end(), s);
        return interpolate(tau_, counts, static_cast<std::size_t>(it - tau_.begin()) - 1, s);
    }

    CumulativeCurve exit_curve(const std::vector<double>& counts) const {
        std::vector<double> t{t0_};
        std::vector<double> v{0.0};
        t.insert(t.end(), tau_.begin(), tau_.end());
        v.insert(v.end(), counts.begin(), counts.end());
        return CumulativeCurve(std::move(t), std::move(v)).normalized();
    }

    void push_point(double e) {
        double total = 0.0;
        for (std::size_t c = 0; c < src_.size(); ++c) {
            const double u = source_value(c, e);
            u_[c].push_back(u);
            total += u;
        }
        const double queued = std::max(0.0, total - total_exit(e));
        const double tau = (e + arc_.beta) + arc_.alpha * queued;
        if (!(tau > tau_.back())) {
            throw std::logic_error("arc " + arc_.id + ": exit time function is not strictly increasing");
        }
        t_.push_back(e);
        tau_.push_back(tau);
        utot_.push_back(total);
    }

    void pop_point() {
        t_.pop_back();
        tau_.pop_back();
        utot_.pop_back();
        for (auto& u : u_) u.pop_back();
        tail_ = false;
    }

    const Arc& arc_;
    double t0_;
    std::vector<Source> src_;
    std::vector<double> t_;
    std::vector<double> tau_;
    std::vector<double> utot_;
    std::vector<std::vector<double>> u_;
    bool tail_ = false;
    std::priority_queue<double, std::vector<double>, std::greater<>> pending_;
};

void check_arc(const Arc& arc) {
    if (!(arc.alpha >= 0.0)) throw std::invalid_argument("arc " + arc.id + ": alpha must be nonnegative");
    if (!(arc.beta > 0.0)) throw std::invalid_argument("arc " + arc.id + ": beta must be strictly positive");
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

std::pair<std::vector<double>, std::vector<double>> normalize_points(const std::vector<double>& t,
                                                                     const std::vector<double>& v) {
    std::vector<double> nt{t.front()};
    std::vector<double> nv{v.front()};
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i] - nt.back() <= kTimeTol) continue;
        if (nt.size() >= 2) {
            const std::size_t k = nt.size() - 1;
            const double w = (nt[k] - nt[k - 1]) / (t[i] - nt[k - 1]);
            const double on_line = nv[k - 1] + w * (v[i] - nv[k - 1]);
            if (std::abs(on_line - nv[k]) <= 1e-12 * std::max(1.0, std::abs(nv[k]))) {
                nt.pop_back();
                nv.pop_back();
            }
        }
        nt.push_back(t[i]);
        nv.push_back(v[i]);
    }
    return {std::move(nt), std::move(nv)};
}

}  // namespace

// ---------------------------------------------------------------------------

ExitTimeFunction::ExitTimeFunction(double beta, std::vector<double> times, std::vector<double> values, bool open_ended)
    : beta_(beta), times_(std::move(times)), values_(std::move(values)), open_ended_(open_ended) {
    if (times_.empty() || times_.size() != values_.size()) {
        throw std::invalid_argument("exit time function needs matching nonempty breakpoints");
    }
}

ExitTimeFunction ExitTimeFunction::free_flow(double beta, double t0) {
    return ExitTimeFunction(beta, {t0}, {t0 + beta}, true);
}

double ExitTimeFunction::operator()(double t) const {
    if (t <= times_.front()) return t + (values_.front() - times_.front());
    if (t >= times_.back()) {
        if (t == times_.back()) return values_.back();
        if (!open_ended_) {
            throw HorizonExhausted("horizon exhausted: exit time requested at " + std::to_string(t) +
                                   " beyond loaded time " + std::to_string(times_.back()));
        }
        return t + (values_.back() - times_.back());
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return interpolate(times_, values_, static_cast<std::size_t>(it - times_.begin()) - 1, t);
}

double ExitTimeFunction::inverse(double s) const {
    if (s <= values_.front()) return s - (values_.front() - times_.front());
    if (s >= values_.back()) {
        if (s == values_.back()) return times_.back();
        if (!open_ended_) throw HorizonExhausted("horizon exhausted: no entry time maps to " + std::to_string(s));
        return s - (values_.back() - times_.back());
    }
    auto it = std::upper_bound(values_.begin(), values_.end(), s);
    return interpolate(values_, times_, static_cast<std::size_t>(it - values_.begin()) - 1, s);
}

ExitTimeFunction ExitTimeFunction::normalized() const {
    auto [t, v] = normalize_points(times_, values_);
    return ExitTimeFunction(beta_, std::move(t), std::move(v), open_ended_);
}

// ---------------------------------------------------------------------------

double default_slack(const Network& net) { return 3.0 * net.total_beta(); }

std::pair<ExitTimeFunction, CumulativeCurve> load_arc(const Arc& arc, const CumulativeCurve& entry,
                                                      const TimeHorizon& horizon, const LoadOptions& opts) {
    check_arc(arc);
    if (entry(horizon.t0) != 0.0) throw std::invalid_argument("arc " + arc.id + ": entry curve must start at zero");
    ArcLoader loader(arc, horizon.t0);
    loader.add_source({&entry, nullptr, 0});

    const double window = arc.beta / 2.0;
    const double last_entry = entry.times().back();
    double slack = horizon.slack;
    double end = horizon.end();
    int extensions = 0;
    double w = horizon.t0;
    bool drained = false;
    for (;;) {
        w = std::min(w + window, end);
        loader.advance(w);
        if (w >= last_entry && near(loader.total_exit(w), entry.final_value())) {
            drained = true;
            break;
        }
        if (w >= end) {
            if (extensions++ >= opts.max_extensions) break;
            slack = slack > 0.0 ? 2.0 * slack : 3.0 * arc.beta;
            end = horizon.tf + slack;
        }
    }
    ArcState s = loader.export_state({{"", 0}}, drained);
    return {std::move(s.tau), std::move(s.exit)};
}

ArcState split_commodities(ArcState state) {
    const ExitTimeFunction& tau = state.tau;
    std::vector<double> grid = state.entry.times();
    for (const auto& c : state.commodities) grid.insert(grid.end(), c.entry.times().begin(), c.entry.times().end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    for (double t : grid) {
        double sum = 0.0;
        for (const auto& c : state.commodities) sum += c.entry(t);
        if (std::abs(sum - state.entry(t)) > 1e-9) {
            throw std::invalid_argument("arc " + state.arc + ": commodity entries do not sum to the arc entry");
        }
    }

    std::vector<double> b = grid;
    b.insert(b.end(), tau.times().begin(), tau.times().end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    const double t0 = b.front();
    std::vector<double> exit_times{t0};
    for (double x : b) {
        if (x > tau.valid_until() && !tau.open_ended()) break;
        exit_times.push_back(tau(x));
    }
    for (auto& c : state.commodities) {
        std::vector<double> t;
        std::vector<double> v;
        for (double s : exit_times) {
            if (!t.empty() && s - t.back() <= kTimeTol) continue;
            t.push_back(s);
            v.push_back(s <= tau(t0) ? 0.0 : c.entry(tau.inverse(s)));
        }
        c.exit = CumulativeCurve(std::move(t), std::move(v)).normalized();
    }
    return state;
}

LoadingResult load_network(const Network& net, const PathFlowVector& h, const TimeHorizon& horizon,
                           const LoadOptions& opts) {
    if (h.size() != net.paths().size()) throw std::invalid_argument("path flow vector does not match the network");
    for (const auto& a : net.arcs()) check_arc(a);

    std::vector<CumulativeCurve> departures;
    departures.reserve(net.paths().size());
    for (std::size_t p = 0; p < net.paths().size(); ++p) departures.push_back(cumulate(h[p], horizon));

    std::vector<std::unique_ptr<ArcLoader>> loaders;
    for (const auto& a : net.arcs()) loaders.push_back(std::make_unique<ArcLoader>(a, horizon.t0));

    std::vector<std::vector<std::pair<std::string, std::size_t>>> keys(net.arcs().size());
    // commodity index of (path, hop) on its arc
    std::vector<std::vector<std::size_t>> slot(net.paths().size());
    for (std::size_t p = 0; p < net.paths().size(); ++p) {
        const auto& arcs = net.path_arcs(p);
        for (std::size_t k = 0; k < arcs.size(); ++k) {
            ArcLoader::Source src;
            if (k == 0) {
                src.curve = &departures[p];
            } else {
                src.upstream = loaders[arcs[k - 1]].get();
                src.commodity = slot[p][k - 1];
            }
            slot[p].push_back(loaders[arcs[k]]->add_source(src));
            keys[arcs[k]].emplace_back(net.paths()[p].id, k);
        }
    }

    auto drained = [&](double w) {
        if (w < horizon.tf) return false;
        for (std::size_t p = 0; p < net.paths().size(); ++p) {
            const auto& arcs = net.path_arcs(p);
            const ArcLoader& last = *loaders[arcs.back()];
            if (!near(last.commodity_exit(slot[p].back(), w), departures[p].final_value())) return false;
        }
        return true;
    };

    const double window = net.min_beta() / 2.0;
    double slack = horizon.slack;
    double end = horizon.end();
    int extensions = 0;
    double w = horizon.t0;
    bool done = false;
    for (;;) {
        w = std::min(w + window, end);
        for (auto& l : loaders) l->advance(w);
        if (drained(w)) {
            done = true;
            break;
        }
        if (w >= end) {
            if (extensions++ >= opts.max_extensions) break;
            slack = slack > 0.0 ? 2.0 * slack : default_slack(net);
            end = horizon.tf + slack;
        }
    }

    LoadingResult result;
    result.horizon = horizon;
    result.loaded_until = w;
    result.truncated = !done;
    for (std::size_t a = 0; a < loaders.size(); ++a) {
        result.arcs.push_back(loaders[a]->export_state(keys[a], done));
        result.residual.push_back(done ? 0.0 : loaders[a]->total_entry() - loaders[a]->total_exit(w));
    }
    return result;
}

double path_exit_time(const LoadingResult& result, const Network& net, std::size_t path, double t) {
    double s = t;
    for (std::size_t a : net.path_arcs(path)) s = result.arcs[a].tau(s);
    if (result.truncated && s > result.loaded_until) {
        throw HorizonExhausted("horizon exhausted: path " + net.paths()[path].id + " exits at " + std::to_string(s) +
                               " after the loaded time " + std::to_string(result.loaded_until));
    }
    return s;
}

double path_exit_time(const LoadingResult& result, const Network& net, const std::string& path, double t) {
    return path_exit_time(result, net, net.path_index(path), t);
}

double path_delay(const LoadingResult& result, const Network& net, std::size_t path, double t) {
    return path_exit_time(result, net, path, t) - t;
}

double path_delay(const LoadingResult& result, const Network& net, const std::string& path, double t) {
    return path_delay(result, net, net.path_index(path), t);
}

}  // namespace ldm
