#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsgarm/core/types.hpp"
#include "dsgarm/metrics/metrics.hpp"

namespace dsgarm::report {

/// Column order of every result CSV.
inline constexpr const char* kCsvHeader =
    "class_id,node_id,throughput_bps,delay_ms,rsv_slot_ratio,rsv_trans_ratio,p_blocking,"
    "collisions,convergence_s,row,point,bin_lo_ms,pdf_mass";

/// Formats with 9 significant digits, independent of the global locale.
std::string format_number(double x);

/// Writes class rows, node rows and one pdf row per class and bin. Simulated
/// summaries fill the collisions and convergence columns.
void write_summary_csv(std::ostream& os, const metrics::Summary& s, int point = 0, bool header = true);

/// Reads back what write_summary_csv produced, grouped by point.
std::map<int, metrics::Summary> read_summary_csv(std::istream& is);

class CsvParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Tolerances {
    double throughput_rel = 0.10;
    double ratio_abs = 0.05;
    double delay_rel = 0.15;
};

std::string_view cross_validation_header();

struct CompareRow {
    std::string scenario;
    int class_id = 0;
    std::string metric;
    double analytic = 0.0;
    double simulated = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0;
    double tolerance = 0.0;
    bool relative = true;
    bool pass = true;
};

/// One row per class with nodes and per metric (throughput, delay, both ratios).
std::vector<CompareRow> compare(const std::string& scenario, const metrics::Summary& analytic,
                                const metrics::Summary& simulated, const Tolerances& tol = {});

void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows, bool header = true);

/// One assignment of sweep keys to values.
using SweepPoint = std::vector<std::pair<std::string, double>>;

/// Parses "key=v1,v2,..." specs. "a,b,...,z" expands arithmetically with
/// step b - a. The result is the cartesian product, first spec outermost.
std::vector<SweepPoint> expand_sweeps(const std::vector<std::string>& specs);

/// Keys: nodes, p_e, eps_abs, g_r, w0, sim_slots, seed, flexing, soft_reservation, adapt, window.
Scenario apply_point(const Scenario& sc, const SweepPoint& p);

std::string describe(const SweepPoint& p);

}  // namespace dsgarm::report
