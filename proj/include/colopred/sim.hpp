#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "colopred/counters.hpp"
#include "colopred/metrics.hpp"

namespace colopred::sim {

// Shared node resources contended by a co-located VE/VH workload pair.
struct ResourceCapacity {
    double vh_cpu = 16.0;   // host cores (core-seconds per second)
    double mem_bw = 100.0;  // GB/s
    double io_bw = 10.0;    // GB/s
    double net_bw = 12.5;   // GB/s
};

// Declarative resource signature of one workload. VE-side workloads consume
// host CPU only through forwarded system calls (syscall_rate * syscall_cost
// host core-seconds per second); cpu_demand of a VE profile describes its own
// accelerator cores and never contends.
struct WorkloadProfile {
    std::string name;
    counters::Source side = counters::Source::VE;
    double base_time = 1.0;       // solo execution time, seconds
    double cpu_demand = 0.0;      // cores
    double mem_bw_demand = 0.0;   // GB/s
    double io_bw_demand = 0.0;    // GB/s
    double net_bw_demand = 0.0;   // GB/s
    double syscall_rate = 0.0;    // calls/s (VE side only; must be 0 on VH)
    double syscall_cost = 0.0;    // host core-seconds per call
    double instr_rate = 1e9;      // instructions/s at zero contention
    double l3mpi_base = 1e-3;     // L3 misses per instruction at zero contention

    double syscall_load() const { return syscall_rate * syscall_cost; }
};

// Validates invariants (positive times/rates, VH side has no syscalls).
// Throws bad_format on violation.
void validate_profile(const WorkloadProfile& p);

struct CoExecutionOutcome {
    double ve_time_solo = 0.0;
    double vh_time_solo = 0.0;
    double ve_time_coloc = 0.0;
    counters::CounterTrace ve_trace;
    counters::CounterTrace vh_trace;
    std::uint64_t repeats_of_shorter = 1;
};

// Counter-synthesis knobs. These are artifact parameters, not measurements:
// they only need to give the classifier a physically plausible signal.
struct SynthesisConfig {
    double interval_s = 1.0;     // sampling interval
    double noise_sigma = 0.05;   // multiplicative Gaussian noise on counter values
    double nominal_hz = 1e9;     // nominal cycles/s used to derive IPC from instr_rate
    double read_fraction = 0.6;  // read share of realized memory traffic
};

// Per-resource overloads for one pairing; f_* are the resulting slowdowns.
struct ContentionBreakdown {
    double o_cpu = 1.0;
    double o_mem = 1.0;
    double o_io = 1.0;
    double o_net = 1.0;
    double f_ve = 1.0;
    double f_vh = 1.0;
    double vh_cpu_load_percent = 0.0;  // 100 * u_cpu / cap.vh_cpu, uncapped
};

// Evaluates the contention model without synthesizing traces.
ContentionBreakdown contention(const WorkloadProfile& ve, const WorkloadProfile& vh,
                               const ResourceCapacity& cap);

// Solo run: the returned time is base_time exactly; only the synthesized
// counters carry noise. Throws infeasible_profile if any demand exceeds its
// capacity (for VH profiles cpu_demand counts against vh_cpu).
std::pair<double, counters::CounterTrace> simulate_solo(const WorkloadProfile& profile,
                                                        const ResourceCapacity& cap,
                                                        std::uint64_t seed,
                                                        const SynthesisConfig& synth = {});

// Co-located run. The slowdown of each side is the largest overload among the
// resources it touches; the shorter side is restarted back-to-back until the
// longer finishes and both traces span that full window.
// Throws side_mismatch, infeasible_profile.
CoExecutionOutcome simulate_pair(const WorkloadProfile& ve, const WorkloadProfile& vh,
                                 const ResourceCapacity& cap, std::uint64_t seed,
                                 const SynthesisConfig& synth = {});

struct DatasetConfig {
    double threshold_percent = metrics::kDefaultThresholdPercent;
    std::vector<counters::Stat> stats = counters::default_stats();
    SynthesisConfig synth;
    int jobs = 1;  // >1 parallelizes over pairs; output is identical to jobs=1
};

// Cartesian product of the two profile lists, one record per (VE, VH) pair.
// Pair (i, j) simulates under derive_seed(seed, i, j), so results do not
// depend on evaluation order or thread count.
std::vector<metrics::CoExecutionRecord> generate_dataset(
    const std::vector<WorkloadProfile>& ve_profiles,
    const std::vector<WorkloadProfile>& vh_profiles, const ResourceCapacity& cap,
    std::uint64_t seed, const DatasetConfig& cfg = {});

// Built-in 7x7 benchmark-class suite (himeno/ior/impi/stream/beff/miniamr/hpl
// -like profiles for each side), calibrated against the default capacities.
std::pair<std::vector<WorkloadProfile>, std::vector<WorkloadProfile>> scenario_suite();

// Profile (de)serialization: a profiles file is a JSON array of objects whose
// keys are exactly the WorkloadProfile field names.
std::vector<WorkloadProfile> read_profiles_json(std::istream& in);
void write_profiles_json(const std::vector<WorkloadProfile>& profiles, std::ostream& out);

// Dataset CSV: ve_name,vh_name,t_solo_ve,t_coloc_ve,degradation_pct,label,<features...>.
void write_dataset_csv(const std::vector<metrics::CoExecutionRecord>& records,
                       std::ostream& out);
std::vector<metrics::CoExecutionRecord> read_dataset_csv(std::istream& in);

}  // namespace colopred::sim
