#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "dsgarm/adapt/adapt.hpp"
#include "dsgarm/analytic/backoff.hpp"
#include "dsgarm/analytic/network.hpp"
#include "dsgarm/core/scenario.hpp"
#include "dsgarm/metrics/metrics.hpp"
#include "dsgarm/report/report.hpp"
#include "dsgarm/sim/simulator.hpp"

using namespace dsgarm;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kNoConvergence = 2, kTolerance = 3 };

struct Output {
    std::unique_ptr<std::ofstream> file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file) throw std::runtime_error("cannot open output '" + path + "'");
        os = file.get();
    }
};

Scenario analysis_scenario(const Scenario& sc) {
    return sc.adapt.enabled ? adapt::apply(sc, adapt::adapt_parameters(sc)) : sc;
}

metrics::Summary simulate_summary(const Scenario& sc, std::ostream* event_log) {
    sim::SimOptions opt;
    opt.event_log = event_log;
    const auto res = sim::run_simulation(sc, opt);
    std::vector<analytic::NodeResult> nodes;
    for (const auto& n : res.nodes) {
        analytic::NodeResult r;
        r.node = n.node;
        r.class_index = n.class_index;
        if (!n.delays_ms.empty()) {
            double s = 0.0;
            for (double d : n.delays_ms) s += d;
            r.delay_ms = s / n.delays_ms.size();
        }
        nodes.push_back(r);
    }
    return metrics::summarize(sc, res, analytic::pdf_range_ms(sc, nodes));
}

struct Points {
    std::vector<report::SweepPoint> points;
    std::vector<Scenario> scenarios;
};

Points expand(const Scenario& base, const std::vector<std::string>& sweeps, std::optional<std::uint64_t> seed) {
    Points p;
    p.points = report::expand_sweeps(sweeps);
    const std::uint64_t base_seed = seed.value_or(base.seed);
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        Scenario sc = report::apply_point(base, p.points[i]);
        sc.seed = base_seed + i;
        p.scenarios.push_back(checked(sc));
    }
    return p;
}

int run_analyze(const std::string& config, const std::string& out) {
    const Scenario sc = analysis_scenario(checked(load_scenario(config)));
    const auto sol = analytic::solve_network(sc);
    Output o(out);
    report::write_summary_csv(*o.os, metrics::summarize(sc, sol));
    return kOk;
}

int run_simulate(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
                 const std::vector<std::string>& sweeps, const std::string& event_log) {
    const auto pts = expand(load_scenario(config), sweeps, seed);
    std::unique_ptr<std::ofstream> log;
    if (!event_log.empty()) {
        log = std::make_unique<std::ofstream>(event_log, std::ios::binary);
        if (!*log) throw std::runtime_error("cannot open event log '" + event_log + "'");
    }
    Output o(out);
    for (std::size_t i = 0; i < pts.scenarios.size(); ++i)
        report::write_summary_csv(*o.os, simulate_summary(pts.scenarios[i], log.get()), static_cast<int>(i), i == 0);
    return kOk;
}

int run_compare(const std::string& config, const std::string& sim_config, const std::string& out,
                std::optional<std::uint64_t> seed, const std::vector<std::string>& sweeps) {
    const auto an_pts = expand(load_scenario(config), sweeps, seed);
    const auto sim_pts = sim_config.empty() ? an_pts : expand(load_scenario(sim_config), sweeps, seed);
    std::vector<report::CompareRow> rows;
    for (std::size_t i = 0; i < an_pts.scenarios.size(); ++i) {
        const Scenario an_sc = analysis_scenario(an_pts.scenarios[i]);
        const auto an = metrics::summarize(an_sc, analytic::solve_network(an_sc));
        const auto sm = simulate_summary(sim_pts.scenarios[i], nullptr);
        const std::string id = an_pts.scenarios[i].name + "[" + report::describe(an_pts.points[i]) + "]";
        auto r = report::compare(id, an, sm);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    Output o(out);
    report::write_compare_csv(*o.os, rows);
    bool ok = true;
    for (const auto& r : rows)
        if (!r.pass) {
            if (ok) std::cerr << "tolerance breach:\n";
            ok = false;
            std::cerr << "  " << r.scenario << " class " << r.class_id << ' ' << r.metric << ": analytic "
                      << report::format_number(r.analytic) << " simulated " << report::format_number(r.simulated)
                      << " error " << report::format_number(r.relative ? r.rel_error : r.abs_error) << " > "
                      << report::format_number(r.tolerance) << '\n';
        }
    return ok ? kOk : kTolerance;
}

int run_adapt(const std::string& config, const std::string& out) {
    const Scenario sc = checked(load_scenario(config));
    const auto r = adapt::adapt_parameters(sc);
    Output o(out);
    auto& os = *o.os;
    os << "class_id,weight,n_abs,n_rel,predicted_delay_ms,blocking,failing,p_rsv_sui,abs_ratio,rel_ratio,"
          "fallback_used,infeasible\n";
    for (std::size_t c = 0; c < sc.traffic_classes.size(); ++c) {
        bool failing = false;
        for (int f : r.failing_classes) failing = failing || f == static_cast<int>(c);
        auto at = [&](const auto& v) { return c < v.size() ? v[c] : 0; };
        os << sc.traffic_classes[c].id << ',' << report::format_number(at(r.weights)) << ',' << at(r.n_abs) << ','
           << at(r.n_rel) << ',' << report::format_number(at(r.predicted_delays)) << ','
           << report::format_number(at(r.blocking)) << ',' << (failing ? 1 : 0) << ','
           << report::format_number(r.p_rsv_sui) << ',' << report::format_number(r.abs_ratio) << ','
           << report::format_number(r.rel_ratio) << ',' << (r.fallback_used ? 1 : 0) << ','
           << (r.infeasible ? 1 : 0) << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid reservation MAC: analytic model, simulator and parameter adaptation"};
    app.require_subcommand(1);

    std::string config, out, sim_config, event_log;
    std::vector<std::string> sweeps;
    std::optional<std::uint64_t> seed;

    auto* analyze = app.add_subcommand("analyze", "Solve the analytic model");
    auto* simulate = app.add_subcommand("simulate", "Run the event simulator");
    auto* cmp = app.add_subcommand("compare", "Cross-validate model and simulator");
    auto* adapt_cmd = app.add_subcommand("adapt", "Run parameter adaptation");
    for (auto* sub : {analyze, simulate, cmp, adapt_cmd}) {
        sub->add_option("config", config, "Scenario JSON file")->required();
        sub->add_option("-o,--output", out, "Output CSV path (stdout when omitted)");
    }
    for (auto* sub : {simulate, cmp}) {
        sub->add_option("--seed", seed, "Base seed; sweep point i uses seed + i");
        sub->add_option("--sweep", sweeps, "key=v1,v2,... (a,b,...,z expands a range)");
    }
    simulate->add_option("--event-log", event_log, "Write one line per transmission event");
    cmp->add_option("--sim-config", sim_config, "Scenario used for the simulated side");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) return run_analyze(config, out);
        if (*simulate) return run_simulate(config, out, seed, sweeps, event_log);
        if (*cmp) return run_compare(config, sim_config, out, seed, sweeps);
        return run_adapt(config, out);
    } catch (const InvalidScenario& e) {
        for (const auto& err : e.errors())
            std::cerr << "invalid scenario: " << err.field << ": " << to_string(err.code) << ": " << err.message
                      << '\n';
        return kInvalid;
    } catch (const ScenarioParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kInvalid;
    } catch (const analytic::NoConvergence& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return kNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    }
}
