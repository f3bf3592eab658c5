#include <doctest.h>

#include <clocale>
#include <sstream>

#include "dsgarm/analytic/network.hpp"
#include "dsgarm/report/report.hpp"
#include "dsgarm/sim/simulator.hpp"
#include "support.hpp"

using namespace dsgarm;

namespace {

metrics::Summary sample_sim(std::uint64_t seed = 3) {
    auto sc = reference_scenario(20);
    sc.sim_slots = 200000;
    sc.seed = seed;
    return metrics::summarize(checked(sc), sim::run_simulation(checked(sc)), 100.0);
}

std::string to_csv(const metrics::Summary& s) {
    std::ostringstream os;
    report::write_summary_csv(os, s);
    return os.str();
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(report::format_number(0.1) == "0.1");
    CHECK(report::format_number(1234567891.0) == "1.23456789e+09");
    CHECK(report::format_number(3.14159265358979) == "3.14159265");
    CHECK(report::format_number(1.0 / 0.0) == "inf");
    // A comma-decimal global locale must not leak into output.
    if (std::setlocale(LC_ALL, "de_DE.UTF-8")) {
        CHECK(report::format_number(2.5) == "2.5");
        std::setlocale(LC_ALL, "C");
    }
}

TEST_CASE("CSV header and row layout") {
    const auto sc = reference_scenario(12);
    const auto s = metrics::summarize(sc, analytic::solve_network(sc));
    const auto text = to_csv(s);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == report::kCsvHeader);
    int class_rows = 0, node_rows = 0;
    while (std::getline(in, line)) {
        if (line.find(",class,") != std::string::npos) ++class_rows;
        if (line.find(",node,") != std::string::npos) ++node_rows;
    }
    CHECK(class_rows == 6);
    CHECK(node_rows == 12);
}

TEST_CASE("CSV round trip is exact") {
    const auto s = sample_sim();
    const auto text = to_csv(s);
    std::istringstream in(text);
    const auto back = report::read_summary_csv(in);
    REQUIRE(back.size() == 1u);
    const auto& b = back.at(0);
    CHECK(to_csv(b) == text);
    const auto sc = reference_scenario(20);
    CHECK(metrics::summary_wadu(sc, b) == metrics::summary_wadu(sc, s));
    CHECK(metrics::summary_uwt(sc, b) == metrics::summary_uwt(sc, s));
    for (std::size_t c = 0; c < s.classes.size(); ++c) {
        CHECK(b.classes[c].delay_pdf == s.classes[c].delay_pdf);
        CHECK(b.classes[c].collisions == s.classes[c].collisions);
    }
}

TEST_CASE("CSV reader rejects garbage") {
    std::istringstream bad_header("a,b,c\n");
    CHECK_THROWS_AS(report::read_summary_csv(bad_header), report::CsvParseError);
    std::istringstream bad_row(std::string(report::kCsvHeader) + "\n1,2,3\n");
    CHECK_THROWS_AS(report::read_summary_csv(bad_row), report::CsvParseError);
}

TEST_CASE("sweep expansion") {
    const auto a = report::expand_sweeps({"nodes=10,20,...,70"});
    REQUIRE(a.size() == 7u);
    CHECK(a.front()[0].second == 10.0);
    CHECK(a.back()[0].second == 70.0);
    const auto b = report::expand_sweeps({"nodes=10,20", "p_e=0,0.05,0.1"});
    REQUIRE(b.size() == 6u);
    CHECK(b[0][0].second == 10.0);
    CHECK(b[1][1].second == 0.05);
    CHECK(b[3][0].second == 20.0);
    CHECK(report::expand_sweeps({}).size() == 1u);
    CHECK_THROWS_AS(report::expand_sweeps({"nodes"}), std::invalid_argument);
    CHECK_THROWS_AS(report::expand_sweeps({"nodes=1,x"}), std::invalid_argument);
    CHECK_THROWS_AS(report::expand_sweeps({"nodes=...,5"}), std::invalid_argument);
}

TEST_CASE("sweep points modify the scenario") {
    const auto sc = reference_scenario(60);
    const auto p = report::apply_point(sc, {{"nodes", 30}, {"p_e", 0.1}, {"flexing", 0}, {"window", 25}});
    CHECK(p.population.total() == 30);
    CHECK(p.channel.p_e == 0.1);
    CHECK_FALSE(p.protocol.flexing);
    for (const auto& s : node_specs(p))
        if (s.mechanism != Mechanism::Csma) CHECK(s.window == 25);
    CHECK_THROWS_AS(report::apply_point(sc, {{"speed", 1}}), std::invalid_argument);
}

TEST_CASE("comparison rows and tolerances") {
    auto sc = testsupport::make_scenario(
        {testsupport::make_class(0, Mechanism::Rel, 80), testsupport::make_class(1, Mechanism::Csma, 16)}, {10, 10},
        0.0, 2'000'000);
    const auto an = metrics::summarize(sc, analytic::solve_network(sc));
    const auto sm = metrics::summarize(sc, sim::run_simulation(sc), 200.0);
    const auto rows = report::compare("i", an, sm);
    CHECK(rows.size() == 2u * 4u);
    for (const auto& r : rows) CHECK(r.pass);

    auto off = sc;
    off.channel.p_e = 0.2;
    const auto bad = report::compare("i", an, metrics::summarize(off, sim::run_simulation(off), 200.0));
    CHECK(std::any_of(bad.begin(), bad.end(), [](const auto& r) { return !r.pass; }));

    std::ostringstream os;
    report::write_compare_csv(os, rows);
    CHECK(os.str().rfind(std::string(report::cross_validation_header()), 0) == 0);
}
