#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dsgarm/core/scenario.hpp"
#include "dsgarm/sim/simulator.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = DSGARM_CLI;
const std::string kScenarios = SCENARIO_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("dsgarm_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Run run(const std::string& args) {
    static int n = 0;
    const auto out = scratch() / ("stdout" + std::to_string(n));
    const auto err = scratch() / ("stderr" + std::to_string(n++));
    const std::string cmd = kCli + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

int count_rows(const std::string& csv, const std::string& needle) {
    int n = 0;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);)
        if (line.find(needle) != std::string::npos) ++n;
    return n;
}

}  // namespace

TEST_CASE("analyze the reference scenario") {
    const auto csv = scratch() / "ref.csv";
    const auto r = run("analyze " + kScenarios + "/reference.json -o " + csv.string());
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    const auto text = slurp(csv);
    CHECK(count_rows(text, ",class,") == 6);
    const auto again = run("analyze " + kScenarios + "/reference.json");
    CHECK(again.out == text);
}

TEST_CASE("malformed and invalid configs exit 1") {
    const auto bad = scratch() / "bad.json";
    std::ofstream(bad) << "{ \"traffic_classes\": [ }";
    auto r = run("analyze " + bad.string());
    CHECK(r.code == 1);
    CHECK_FALSE(r.err.empty());

    auto j = nlohmann::json::parse(slurp(kScenarios + "/reference.json"));
    j["traffic_classes"][0]["alpha"] = -1.0;
    j["layout"]["eps_abs"] = 0.9;
    const auto invalid = scratch() / "invalid.json";
    std::ofstream(invalid) << j.dump();
    r = run("analyze " + invalid.string());
    CHECK(r.code == 1);
    CHECK(count_rows(r.err, "invalid scenario") >= 2);

    CHECK(run("simulate " + (scratch() / "missing.json").string()).code == 1);
}

TEST_CASE("simulate sweep and determinism") {
    const auto a = run("simulate " + kScenarios + "/scenario_ii.json --sweep nodes=10,20,...,70 --sweep sim_slots=200000 --seed 1");
    REQUIRE(a.code == 0);
    CHECK(count_rows(a.out, ",class,") == 7 * 3);
    const auto b = run("simulate " + kScenarios + "/scenario_ii.json --sweep nodes=10,20,...,70 --sweep sim_slots=200000 --seed 1");
    CHECK(a.out == b.out);
    const auto c = run("simulate " + kScenarios + "/scenario_ii.json --sweep nodes=10,20,...,70 --sweep sim_slots=200000 --seed 2");
    CHECK(c.code == 0);
    CHECK(c.out != a.out);
}

TEST_CASE("simulate writes an event log") {
    const auto log = scratch() / "events.tsv";
    const auto r = run("simulate " + kScenarios + "/scenario_i.json --sweep sim_slots=100000 --event-log " + log.string());
    REQUIRE(r.code == 0);
    const auto text = slurp(log);
    auto sc = dsgarm::load_scenario(kScenarios + "/scenario_i.json");
    sc.sim_slots = 100000;
    const auto res = dsgarm::sim::run_simulation(dsgarm::checked(sc));
    std::int64_t tx = 0;
    for (const auto& n : res.nodes) tx += n.tx_events();
    CHECK(count_rows(text, "\t") == tx);
    CHECK(count_rows(text, "\tcollision\t") > 0);
}

TEST_CASE("compare exit codes") {
    const auto ok = run("compare " + kScenarios + "/scenario_i.json");
    CHECK(ok.code == 0);
    CHECK(count_rows(ok.out, "scenario_i[") == 2 * 4);

    auto j = nlohmann::json::parse(slurp(kScenarios + "/scenario_i.json"));
    j["channel"]["p_e"] = 0.2;
    const auto noisy = scratch() / "noisy.json";
    std::ofstream(noisy) << j.dump();
    const auto bad = run("compare " + kScenarios + "/scenario_i.json --sim-config " + noisy.string());
    CHECK(bad.code == 3);
    CHECK(count_rows(bad.err, "tolerance breach") == 1);
}

TEST_CASE("adapt prints one row per class") {
    const auto r = run("adapt " + kScenarios + "/reference.json");
    CHECK(r.code == 0);
    CHECK(count_rows(r.out, ",") == 1 + 6);
}

TEST_CASE("usage errors") {
    CHECK(run("").code != 0);
    CHECK(run("frobnicate x.json").code != 0);
}
