#include "dsgarm/adapt/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dsgarm/analytic/network.hpp"

namespace dsgarm::adapt {

TargetUnreachable::TargetUnreachable(double lo, double hi, WindowChoice closest)
    : std::runtime_error("target reservation proportion outside achievable range [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]"),
      lo_(lo), hi_(hi), closest_(std::move(closest)) {}

namespace {

constexpr double kRatioTolerance = 0.01;
constexpr double kSuiStep = 0.02;
constexpr double kAlphaStep = 1.05;
constexpr int kPhaseCap = 200;

Scenario with_parameters(const Scenario& sc, const std::vector<int>& windows, const std::vector<double>& weights) {
    Scenario out = sc;
    for (std::size_t c = 0; c < out.traffic_classes.size(); ++c) {
        if (c < windows.size() && windows[c] > 0) out.traffic_classes[c].window = windows[c];
        if (c < weights.size()) out.traffic_classes[c].alpha = weights[c];
    }
    out.population = derive_population(out.traffic_classes, out.class_mix);
    return out;
}

bool in_group(const Scenario& sc, std::size_t c, Mechanism g) {
    return sc.traffic_classes[c].mechanism == g && sc.class_mix[c] > 0;
}

// Analytic view of one group at the scenario's current windows.
WindowChoice evaluate(const Scenario& s, Mechanism group) {
    const std::size_t nc = s.traffic_classes.size();
    WindowChoice out;
    out.windows.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) out.windows[c] = s.traffic_classes[c].window;
    out.predicted_delays.assign(nc, 0.0);
    out.blocking.assign(nc, 0.0);

    if (group == Mechanism::Abs) {
        std::vector<int> w, cls;
        for (const auto& n : node_specs(s))
            if (n.mechanism == Mechanism::Abs) {
                w.push_back(n.window);
                cls.push_back(n.class_index);
            }
        const auto abs = analytic::solve_abs_group(w, s.channel, s.contention);
        analytic::MacRates r;
        analytic::abs_metrics(r, abs, s.channel, s.period_slots());
        const int n_abs = s.layout.abs_periods();
        const double cycle_ms = std::max<double>(s.cycle_slots(), n_abs * r.t_abs_tot) * s.channel.slot_ms();
        std::vector<int> count(nc, 0);
        for (std::size_t k = 0; k < w.size(); ++k) {
            const int c = cls[k];
            const double per_cycle = n_abs * r.p_abs_suc[k];
            out.predicted_delays[c] += per_cycle > 0.0 ? cycle_ms / per_cycle : 1e300;
            const int d = analytic::blocking_quantity(s.traffic_classes[c], s);
            std::vector<double> rf(d, 0.0);
            const auto& others = abs.occupancy.reserved_by_others[k];
            for (int j = 0; j < d && j < static_cast<int>(others.size()); ++j) rf[j] = others[j];
            out.blocking[c] += analytic::blocking_probability(rf, d);
            ++count[c];
        }
        for (std::size_t c = 0; c < nc; ++c)
            if (count[c] > 0) {
                out.predicted_delays[c] /= count[c];
                out.blocking[c] /= count[c];
            }
        out.achieved_ratio = abs.p_abs_tot;
    } else {
        const auto sol = analytic::solve_network(s);
        for (std::size_t c = 0; c < nc; ++c) out.predicted_delays[c] = sol.classes[c].delay_ms;
        out.achieved_ratio = sol.rates.p_rel_rsv;
    }
    return out;
}

}  // namespace

WindowChoice change_reservation_window(const std::vector<double>& weights, double target, Mechanism group,
                                       const Scenario& ctx) {
    if (!(target > 0.0 && target < 1.0)) throw std::invalid_argument("change_reservation_window: target must lie in (0,1)");
    const std::size_t nc = ctx.traffic_classes.size();
    if (weights.size() != nc) throw std::invalid_argument("change_reservation_window: one weight per class");
    double a_max = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
        if (!(weights[c] > 0.0)) throw std::invalid_argument("change_reservation_window: weights must be positive");
        if (in_group(ctx, c, group)) a_max = std::max(a_max, weights[c]);
    }
    const int n_min = ctx.adapt.n_min, n_max = ctx.adapt.n_max;
    if (a_max == 0.0) {
        WindowChoice none = evaluate(with_parameters(ctx, {}, weights), group);
        return none;
    }

    std::map<int, WindowChoice> memo;
    auto at = [&](int base) -> const WindowChoice& {
        auto it = memo.find(base);
        if (it != memo.end()) return it->second;
        std::vector<int> w(nc, 0);
        for (std::size_t c = 0; c < nc; ++c)
            if (ctx.traffic_classes[c].mechanism == group)
                w[c] = std::clamp(static_cast<int>(std::lround(base / weights[c])), n_min, n_max);
        WindowChoice ch = evaluate(with_parameters(ctx, w, weights), group);
        ch.n_base = base;
        return memo.emplace(base, std::move(ch)).first->second;
    };

    // The proportion falls as the windows grow.
    int lo = 1, hi = static_cast<int>(std::ceil(n_max * a_max));
    const double r_lo = at(lo).achieved_ratio, r_hi = at(hi).achieved_ratio;
    if (target > r_lo + kRatioTolerance) throw TargetUnreachable(r_hi, r_lo, at(lo));
    if (target < r_hi - kRatioTolerance) throw TargetUnreachable(r_hi, r_lo, at(hi));
    if (target >= r_lo) return at(lo);
    if (target <= r_hi) return at(hi);
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (at(mid).achieved_ratio > target)
            lo = mid;
        else
            hi = mid;
    }
    const auto& a = at(lo);
    const auto& b = at(hi);
    return std::abs(a.achieved_ratio - target) < std::abs(b.achieved_ratio - target) ? a : b;
}

namespace {

WindowChoice choose(const std::vector<double>& w, double target, Mechanism g, const Scenario& ctx) {
    try {
        return change_reservation_window(w, target, g, ctx);
    } catch (const TargetUnreachable& e) {
        return e.closest();
    }
}

struct Corrected {
    std::vector<double> weights;
    WindowChoice choice;
    std::vector<int> failing;
};

// Raise the weight of every real-time class missing its bound until all pass,
// the windows cannot shrink further, or the cap is hit.
Corrected correct_weights(const Scenario& sc, std::vector<double> w, double p_sui, const std::vector<double>& bound) {
    Corrected out;
    WindowChoice ch = choose(w, p_sui, Mechanism::Abs, sc);
    for (int it = 0;; ++it) {
        std::vector<int> failing;
        for (std::size_t c = 0; c < sc.traffic_classes.size(); ++c)
            if (in_group(sc, c, Mechanism::Abs) && sc.traffic_classes[c].real_time &&
                ch.predicted_delays[c] > bound[c])
                failing.push_back(static_cast<int>(c));
        if (failing.empty() || it >= kPhaseCap) {
            out.failing = std::move(failing);
            break;
        }
        bool moved = false;
        for (int c : failing)
            if (ch.windows[c] > sc.adapt.n_min) {
                w[c] *= kAlphaStep;
                moved = true;
            }
        if (!moved) {
            out.failing = std::move(failing);
            break;
        }
        ch = choose(w, p_sui, Mechanism::Abs, sc);
    }
    out.weights = std::move(w);
    out.choice = std::move(ch);
    return out;
}

}  // namespace

AdaptResult adapt_parameters(const Scenario& sc) {
    const auto& cfg = sc.adapt;
    const std::size_t nc = sc.traffic_classes.size();
    std::vector<double> w0(nc);
    for (std::size_t c = 0; c < nc; ++c) w0[c] = sc.traffic_classes[c].alpha;
    auto rt = [&](std::size_t c) { return in_group(sc, c, Mechanism::Abs) && sc.traffic_classes[c].real_time; };

    AdaptResult res;
    // Step 1: blocking correction.
    double p_sui = cfg.p_rsv_sui;
    for (int it = 0; it < kPhaseCap; ++it) {
        const WindowChoice ch = choose(w0, p_sui, Mechanism::Abs, sc);
        bool ok = true;
        for (std::size_t c = 0; c < nc; ++c)
            if (rt(c) && ch.blocking[c] > cfg.th_bk) ok = false;
        if (ok || p_sui - kSuiStep <= 0.0) break;
        p_sui -= kSuiStep;
    }
    res.p_rsv_sui = p_sui;

    // Steps 2-3 against the strict bound, step 4 against the typical delay.
    std::vector<double> strict(nc), typical(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        strict[c] = cfg.lambda * sc.traffic_classes[c].l_min;
        typical[c] = 0.5 * (sc.traffic_classes[c].l_min + sc.traffic_classes[c].l_max);
    }
    Corrected cor = correct_weights(sc, w0, p_sui, strict);
    if (!cor.failing.empty()) {
        res.fallback_used = true;
        cor = correct_weights(sc, w0, p_sui, typical);
        if (!cor.failing.empty()) {
            res.infeasible = true;
            res.failing_classes = cor.failing;
        }
    }
    res.weights = cor.weights;
    res.abs_ratio = cor.choice.achieved_ratio;
    res.n_abs.assign(nc, 0);
    for (std::size_t c = 0; c < nc; ++c)
        if (sc.traffic_classes[c].mechanism == Mechanism::Abs) res.n_abs[c] = cor.choice.windows[c];

    // Step 5: relative reservation windows.
    const Scenario with_abs = with_parameters(sc, cor.choice.windows, res.weights);
    const WindowChoice rel = choose(res.weights, sc.layout.eps_rel, Mechanism::Rel, with_abs);
    res.rel_ratio = rel.achieved_ratio;
    res.n_rel.assign(nc, 0);
    for (std::size_t c = 0; c < nc; ++c)
        if (sc.traffic_classes[c].mechanism == Mechanism::Rel) res.n_rel[c] = rel.windows[c];

    const auto sol = analytic::solve_network(apply(sc, res));
    res.predicted_delays.resize(nc);
    res.blocking.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        res.predicted_delays[c] = sol.classes[c].delay_ms;
        res.blocking[c] = sol.classes[c].p_blocking;
    }
    return res;
}

Scenario apply(const Scenario& sc, const AdaptResult& r) {
    std::vector<int> w(sc.traffic_classes.size(), 0);
    for (std::size_t c = 0; c < w.size(); ++c) {
        if (c < r.n_abs.size() && r.n_abs[c] > 0) w[c] = r.n_abs[c];
        if (c < r.n_rel.size() && r.n_rel[c] > 0) w[c] = r.n_rel[c];
    }
    return with_parameters(sc, w, r.weights);
}

bool audit(const Scenario& sc, const AdaptResult& r, std::vector<int>* offending) {
    const auto sol = analytic::solve_network(apply(sc, r));
    bool ok = true;
    for (std::size_t c = 0; c < sc.traffic_classes.size(); ++c) {
        const auto& tc = sc.traffic_classes[c];
        if (!in_group(sc, c, Mechanism::Abs) || !tc.real_time) continue;
        if (std::find(r.failing_classes.begin(), r.failing_classes.end(), static_cast<int>(c)) !=
            r.failing_classes.end())
            continue;
        const double bound = r.fallback_used ? 0.5 * (tc.l_min + tc.l_max) : sc.adapt.lambda * tc.l_min;
        const bool good = sol.classes[c].delay_ms <= bound * (1.0 + 1e-9) &&
                          (r.fallback_used || sol.classes[c].p_blocking <= sc.adapt.th_bk);
        if (!good) {
            ok = false;
            if (offending) offending->push_back(static_cast<int>(c));
        }
    }
    return ok;
}

}  // namespace dsgarm::adapt
