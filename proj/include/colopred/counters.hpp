#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace colopred::counters {

// Missing measurements travel as quiet NaN through parsing and aggregation;
// they are only dropped later, in the feature-cleaning stage.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return v != v; }

enum class Source { VH, VE };

const char* source_name(Source s);

// One sampling interval of hardware-counter readings.
// Cache-miss counts are in millions over the interval, traffic in GB over the
// interval, hit ratios in [0,1]; any field other than timestamp may be missing.
struct CounterSample {
    double timestamp = 0.0;  // seconds since trace start
    Source source = Source::VH;
    double exec = kMissing;      // instructions per nominal cycle
    double ipc = kMissing;       // instructions per cycle
    double l3miss = kMissing;    // L3 line misses (millions)
    double l2miss = kMissing;    // L2 line misses (millions)
    double l3hit = kMissing;     // L3 hit ratio
    double l2hit = kMissing;     // L2 hit ratio
    double l3mpi = kMissing;     // L3 misses per instruction
    double l2mpi = kMissing;     // L2 misses per instruction
    double read_gb = kMissing;   // DRAM read traffic (GB)
    double write_gb = kMissing;  // DRAM write traffic (GB)
    double freq = kMissing;      // optional column: core frequency ratio
    double cpu_load = kMissing;  // optional column: CPU load, percent of the core set
};

struct CounterTrace {
    std::string run_id;
    std::string workload_name;
    Source source = Source::VH;
    bool has_freq = false;      // schema: optional columns present in this trace
    bool has_cpu_load = false;
    std::vector<CounterSample> samples;
};

// Ordered, uniquely named feature values; entries may be missing.
struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;

    std::size_t size() const { return names.size(); }
    // Returns the value for `name`, or throws Errc::missing_feature.
    double at(const std::string& name) const;
    bool has(const std::string& name) const;
};

enum class Stat { mean, std_dev, min, max, p50, p95 };

const char* stat_name(Stat s);
Stat stat_from_name(const std::string& name);  // throws Errc::bad_format

// Default statistic set used for dataset feature rows.
std::vector<Stat> default_stats();

// Parses the counter CSV export for one (run, source). Unparseable numeric
// cells become missing values rather than errors; the row count is preserved.
// Throws: missing_column, unknown_column, empty_trace, non_monotonic_time,
// bad_format.
CounterTrace parse_counter_csv(std::istream& in, Source source,
                               const std::string& run_id = "",
                               const std::string& workload_name = "");

// Inverse of parse_counter_csv; values are written shortest-round-trip so a
// write/parse cycle reproduces the trace bit for bit.
void write_counter_csv(const CounterTrace& trace, std::ostream& out);

// Collapses a trace into `<source>_<counter>_<stat>` features, one per present
// counter column and requested statistic. Statistics skip missing entries; an
// all-missing column yields a missing feature value. Duplicate stats are
// emitted once, in first-occurrence order.
FeatureVector aggregate_trace(const CounterTrace& trace, const std::vector<Stat>& stats);

// Concatenates VE features then VH features. Throws duplicate_feature_name if
// any name appears in both.
FeatureVector merge_pair_features(const FeatureVector& ve, const FeatureVector& vh);

}  // namespace colopred::counters
