#include "colopred/counters.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "colopred/error.hpp"
#include "detail_text.hpp"

namespace colopred::counters {

namespace {

struct ColumnDef {
    const char* name;
    double CounterSample::* field;
    bool ratio;      // value constrained to [0,1]
    bool optional;   // may be absent from the header
};

// Header order is fixed: the required columns first, optional ones trailing.
constexpr ColumnDef kColumns[] = {
    {"exec", &CounterSample::exec, false, false},
    {"ipc", &CounterSample::ipc, false, false},
    {"l3miss", &CounterSample::l3miss, false, false},
    {"l2miss", &CounterSample::l2miss, false, false},
    {"l3hit", &CounterSample::l3hit, true, false},
    {"l2hit", &CounterSample::l2hit, true, false},
    {"l3mpi", &CounterSample::l3mpi, false, false},
    {"l2mpi", &CounterSample::l2mpi, false, false},
    {"read_gb", &CounterSample::read_gb, false, false},
    {"write_gb", &CounterSample::write_gb, false, false},
    {"freq", &CounterSample::freq, false, true},
    {"cpu_load", &CounterSample::cpu_load, false, true},
};
constexpr std::size_t kRequiredColumns = 10;

bool getline_any(std::istream& in, std::string& line) {
    return static_cast<bool>(std::getline(in, line));
}

}  // namespace

const char* source_name(Source s) { return s == Source::VE ? "VE" : "VH"; }

double FeatureVector::at(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    throw Error(Errc::missing_feature, "feature '" + name + "' not present");
}

bool FeatureVector::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

const char* stat_name(Stat s) {
    switch (s) {
        case Stat::mean: return "mean";
        case Stat::std_dev: return "std";
        case Stat::min: return "min";
        case Stat::max: return "max";
        case Stat::p50: return "p50";
        case Stat::p95: return "p95";
    }
    return "?";
}

Stat stat_from_name(const std::string& name) {
    for (Stat s : {Stat::mean, Stat::std_dev, Stat::min, Stat::max, Stat::p50, Stat::p95})
        if (name == stat_name(s)) return s;
    throw Error(Errc::bad_format, "unknown statistic '" + name + "'");
}

std::vector<Stat> default_stats() {
    return {Stat::mean, Stat::std_dev, Stat::min, Stat::max, Stat::p95};
}

CounterTrace parse_counter_csv(std::istream& in, Source source, const std::string& run_id,
                               const std::string& workload_name) {
    std::string line;
    if (!getline_any(in, line))
        throw Error(Errc::empty_trace, "no header row");
    auto header = detail::split_csv_line(line);

    if (header.empty() || header[0] != "timestamp")
        throw Error(Errc::missing_column, "header must start with 'timestamp'");
    for (std::size_t i = 0; i < kRequiredColumns; ++i) {
        if (i + 1 >= header.size() || header[i + 1] != kColumns[i].name)
            throw Error(Errc::missing_column,
                        std::string("required column '") + kColumns[i].name +
                            "' missing or out of order");
    }

    // Trailing optional columns, each at most once.
    std::vector<const ColumnDef*> layout;
    for (std::size_t i = 0; i < kRequiredColumns; ++i) layout.push_back(&kColumns[i]);
    std::unordered_set<std::string> seen;
    for (std::size_t i = kRequiredColumns + 1; i < header.size(); ++i) {
        const ColumnDef* def = nullptr;
        for (const auto& c : kColumns)
            if (c.optional && header[i] == c.name) def = &c;
        if (def == nullptr || !seen.insert(header[i]).second)
            throw Error(Errc::unknown_column, "unsupported column '" + header[i] + "'");
        layout.push_back(def);
    }

    CounterTrace trace;
    trace.run_id = run_id;
    trace.workload_name = workload_name;
    trace.source = source;
    trace.has_freq = seen.count("freq") > 0;
    trace.has_cpu_load = seen.count("cpu_load") > 0;

    std::size_t row_no = 1;
    while (getline_any(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != layout.size() + 1)
            throw Error(Errc::bad_format,
                        "row " + std::to_string(row_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(layout.size() + 1));
        CounterSample s;
        s.source = source;
        s.timestamp = detail::parse_cell_lenient(cells[0]);
        if (s.timestamp == s.timestamp && s.timestamp < 0.0)
            throw Error(Errc::bad_format,
                        "negative timestamp in row " + std::to_string(row_no));
        for (std::size_t i = 0; i < layout.size(); ++i) {
            double v = detail::parse_cell_lenient(cells[i + 1]);
            if (!is_missing(v)) {
                if (layout[i]->ratio && (v < 0.0 || v > 1.0))
                    throw Error(Errc::bad_format,
                                std::string(layout[i]->name) + " out of [0,1] in row " +
                                    std::to_string(row_no));
                if (!layout[i]->ratio && v < 0.0)
                    throw Error(Errc::bad_format, std::string(layout[i]->name) +
                                                      " negative in row " +
                                                      std::to_string(row_no));
            }
            s.*(layout[i]->field) = v;
        }
        trace.samples.push_back(s);
    }

    if (trace.samples.empty())
        throw Error(Errc::empty_trace, "no data rows");
    double prev = -1.0;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        double t = trace.samples[i].timestamp;
        if (!(t > prev) || is_missing(t))
            throw Error(Errc::non_monotonic_time,
                        "timestamps must be strictly increasing (sample " +
                            std::to_string(i) + ")");
        prev = t;
    }
    return trace;
}

void write_counter_csv(const CounterTrace& trace, std::ostream& out) {
    out << "timestamp";
    std::vector<const ColumnDef*> layout;
    for (const auto& c : kColumns) {
        if (c.optional && std::string(c.name) == "freq" && !trace.has_freq) continue;
        if (c.optional && std::string(c.name) == "cpu_load" && !trace.has_cpu_load) continue;
        layout.push_back(&c);
        out << ',' << c.name;
    }
    out << '\n';
    for (const auto& s : trace.samples) {
        out << detail::fmt_double(s.timestamp);
        for (const auto* c : layout) out << ',' << detail::fmt_double(s.*(c->field));
        out << '\n';
    }
}

namespace {

double stat_over(const std::vector<double>& sorted, Stat stat, double mean, double m2) {
    const std::size_t n = sorted.size();
    switch (stat) {
        case Stat::mean:
            return mean;
        case Stat::std_dev:
            return std::sqrt(m2 / static_cast<double>(n));
        case Stat::min:
            return sorted.front();
        case Stat::max:
            return sorted.back();
        case Stat::p50:
        case Stat::p95: {
            double q = stat == Stat::p50 ? 0.50 : 0.95;
            double pos = q * static_cast<double>(n - 1);
            std::size_t lo = static_cast<std::size_t>(pos);
            double frac = pos - static_cast<double>(lo);
            if (lo + 1 >= n) return sorted.back();
            return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
        }
    }
    return kMissing;
}

}  // namespace

FeatureVector aggregate_trace(const CounterTrace& trace, const std::vector<Stat>& stats) {
    if (trace.samples.empty())
        throw Error(Errc::empty_trace, "cannot aggregate an empty trace");

    std::vector<Stat> order;
    for (Stat s : stats)
        if (std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);

    FeatureVector fv;
    const std::string prefix = source_name(trace.source);
    for (const auto& c : kColumns) {
        if (c.optional && std::string(c.name) == "freq" && !trace.has_freq) continue;
        if (c.optional && std::string(c.name) == "cpu_load" && !trace.has_cpu_load) continue;
        std::vector<double> vals;
        vals.reserve(trace.samples.size());
        for (const auto& s : trace.samples) {
            double v = s.*(c.field);
            if (!is_missing(v)) vals.push_back(v);
        }
        double mean = kMissing, m2 = kMissing;
        if (!vals.empty()) {
            std::sort(vals.begin(), vals.end());
            mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            m2 = 0.0;
            for (double v : vals) m2 += (v - mean) * (v - mean);
        }
        for (Stat st : order) {
            fv.names.push_back(prefix + "_" + c.name + "_" + stat_name(st));
            fv.values.push_back(vals.empty() ? kMissing : stat_over(vals, st, mean, m2));
        }
    }
    return fv;
}

FeatureVector merge_pair_features(const FeatureVector& ve, const FeatureVector& vh) {
    FeatureVector out;
    out.names.reserve(ve.size() + vh.size());
    out.values.reserve(ve.size() + vh.size());
    std::unordered_set<std::string> seen;
    auto append = [&](const FeatureVector& src) {
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (!seen.insert(src.names[i]).second)
                throw Error(Errc::duplicate_feature_name,
                            "feature '" + src.names[i] + "' present on both sides");
            out.names.push_back(src.names[i]);
            out.values.push_back(src.values[i]);
        }
    };
    append(ve);
    append(vh);
    return out;
}

}  // namespace colopred::counters
