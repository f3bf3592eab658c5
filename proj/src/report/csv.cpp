#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "dsgarm/report/report.hpp"

namespace dsgarm::report {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 9);
    return std::string(buf, r.ptr);
}

namespace {

double parse_number(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw CsvParseError("bad number '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    int v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw CsvParseError("bad integer '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

struct Row {
    std::string class_id, node_id, throughput, delay, slot, trans, blocking, collisions, convergence, kind,
        point, bin_lo, mass;
};

void emit(std::ostream& os, const Row& r) {
    os << r.class_id << ',' << r.node_id << ',' << r.throughput << ',' << r.delay << ',' << r.slot << ',' << r.trans
       << ',' << r.blocking << ',' << r.collisions << ',' << r.convergence << ',' << r.kind << ',' << r.point << ','
       << r.bin_lo << ',' << r.mass << '\n';
}

}  // namespace

void write_summary_csv(std::ostream& os, const metrics::Summary& s, int point, bool header) {
    if (header) os << kCsvHeader << '\n';
    const std::string pt = std::to_string(point);
    const std::string conv = s.simulated ? format_number(s.convergence_s) : "";
    for (const auto& c : s.classes) {
        emit(os, {std::to_string(c.class_id), "", format_number(c.throughput_bps), format_number(c.delay_ms),
                  format_number(c.rsv_slot_ratio), format_number(c.rsv_trans_ratio), format_number(c.p_blocking),
                  s.simulated ? std::to_string(c.collisions) : "", conv, "class", pt, "", ""});
    }
    for (const auto& n : s.nodes) {
        emit(os, {std::to_string(n.class_id), std::to_string(n.node), format_number(n.throughput_bps),
                  format_number(n.delay_ms), format_number(n.rsv_slot_ratio), format_number(n.rsv_trans_ratio),
                  format_number(n.p_blocking), s.simulated ? std::to_string(n.collisions) : "", "", "node", pt, "",
                  ""});
    }
    for (const auto& c : s.classes)
        for (std::size_t b = 0; b < c.delay_pdf.size(); ++b)
            emit(os, {std::to_string(c.class_id), "", "", "", "", "", "", "", "", "pdf", pt,
                      format_number(b * s.pdf_bin_ms), format_number(c.delay_pdf[b])});
}

std::map<int, metrics::Summary> read_summary_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw CsvParseError("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw CsvParseError("unexpected header");
    std::map<int, metrics::Summary> out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 13) throw CsvParseError("line " + std::to_string(lineno) + ": expected 13 fields");
        auto& s = out[parse_int(f[10])];
        const int cls = parse_int(f[0]);
        auto find_class = [&]() -> metrics::ClassMetrics& {
            for (auto& c : s.classes)
                if (c.class_id == cls) return c;
            throw CsvParseError("line " + std::to_string(lineno) + ": unknown class");
        };
        if (f[9] == "class") {
            metrics::ClassMetrics c;
            c.class_id = cls;
            c.throughput_bps = parse_number(f[2]);
            c.delay_ms = parse_number(f[3]);
            c.rsv_slot_ratio = parse_number(f[4]);
            c.rsv_trans_ratio = parse_number(f[5]);
            c.p_blocking = parse_number(f[6]);
            if (!f[7].empty()) {
                c.collisions = parse_int(f[7]);
                s.simulated = true;
            }
            if (!f[8].empty()) s.convergence_s = parse_number(f[8]);
            s.classes.push_back(std::move(c));
        } else if (f[9] == "node") {
            metrics::NodeMetrics n;
            n.class_id = cls;
            n.node = parse_int(f[1]);
            n.throughput_bps = parse_number(f[2]);
            n.delay_ms = parse_number(f[3]);
            n.rsv_slot_ratio = parse_number(f[4]);
            n.rsv_trans_ratio = parse_number(f[5]);
            n.p_blocking = parse_number(f[6]);
            if (!f[7].empty()) n.collisions = parse_int(f[7]);
            s.nodes.push_back(n);
            ++find_class().nodes;
        } else if (f[9] == "pdf") {
            auto& c = find_class();
            if (c.delay_pdf.size() == 1) s.pdf_bin_ms = parse_number(f[11]);
            c.delay_pdf.push_back(parse_number(f[12]));
        } else {
            throw CsvParseError("line " + std::to_string(lineno) + ": unknown row kind '" + f[9] + "'");
        }
    }
    return out;
}

}  // namespace dsgarm::report
