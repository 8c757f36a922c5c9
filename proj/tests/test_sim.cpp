#include <doctest.h>

#include <cmath>
#include <sstream>

#include "colopred/rng.hpp"
#include "colopred/sim.hpp"
#include "test_util.hpp"

using namespace colopred;
using namespace colopred::sim;
using counters::Source;
using metrics::Label;

namespace {

WorkloadProfile mk(const char* name, Source side, double base, double cpu, double mem,
                   double io, double net, double sc_rate = 0.0, double sc_cost = 0.0) {
    WorkloadProfile p;
    p.name = name;
    p.side = side;
    p.base_time = base;
    p.cpu_demand = cpu;
    p.mem_bw_demand = mem;
    p.io_bw_demand = io;
    p.net_bw_demand = net;
    p.syscall_rate = sc_rate;
    p.syscall_cost = sc_cost;
    p.instr_rate = 2e9;
    p.l3mpi_base = 1e-3;
    return p;
}

// Scalar re-evaluation of the slowdown rule, written independently of
// sim::contention: collect the overload of every resource the VE touches and
// take the worst.
double f_ve_oracle(const WorkloadProfile& ve, const WorkloadProfile& vh,
                   const ResourceCapacity& cap) {
    std::vector<double> touched;
    if (ve.mem_bw_demand > 0)
        touched.push_back((ve.mem_bw_demand + vh.mem_bw_demand) / cap.mem_bw);
    if (ve.io_bw_demand > 0)
        touched.push_back((ve.io_bw_demand + vh.io_bw_demand) / cap.io_bw);
    if (ve.net_bw_demand > 0)
        touched.push_back((ve.net_bw_demand + vh.net_bw_demand) / cap.net_bw);
    if (ve.syscall_rate > 0)
        touched.push_back((vh.cpu_demand + ve.syscall_rate * ve.syscall_cost) / cap.vh_cpu);
    double f = 1.0;
    for (double o : touched) f = std::max(f, std::max(1.0, o));
    return f;
}

}  // namespace

TEST_CASE("solo time is the base time exactly; traces are seed-deterministic") {
    ResourceCapacity cap;
    auto p = mk("w", Source::VE, 100.0, 4.0, 30.0, 1.0, 0.0, 100.0, 0.001);
    auto [t1, trace1] = simulate_solo(p, cap, 7);
    auto [t2, trace2] = simulate_solo(p, cap, 7);
    CHECK(t1 == 100.0);
    REQUIRE(trace1.samples.size() == trace2.samples.size());
    for (std::size_t i = 0; i < trace1.samples.size(); ++i) {
        CHECK(trace1.samples[i].ipc == trace2.samples[i].ipc);
        CHECK(trace1.samples[i].read_gb == trace2.samples[i].read_gb);
    }
    auto [t3, trace3] = simulate_solo(p, cap, 8);
    (void)t3;
    CHECK(trace1.samples[0].ipc != trace3.samples[0].ipc);
}

TEST_CASE("infeasible solo demands are rejected with the field named") {
    ResourceCapacity cap;
    auto p = mk("hog", Source::VE, 10.0, 1.0, 1.2 * cap.mem_bw, 0.0, 0.0);
    CHECK_ERRC(simulate_solo(p, cap, 1), Errc::infeasible_profile);
    try {
        simulate_solo(p, cap, 1);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("hog") != std::string::npos);
        CHECK(std::string(e.what()).find("mem_bw_demand") != std::string::npos);
    }
    auto q = mk("vhhog", Source::VH, 10.0, cap.vh_cpu * 1.01, 0.0, 0.0, 0.0);
    CHECK_ERRC(simulate_solo(q, cap, 1), Errc::infeasible_profile);
}

TEST_CASE("pair: symmetric memory pressure gives the hand-evaluated slowdown") {
    ResourceCapacity cap;
    auto ve = mk("ve", Source::VE, 100.0, 4.0, 0.9 * cap.mem_bw, 0.0, 0.0);
    auto vh = mk("vh", Source::VH, 100.0, 0.0, 0.9 * cap.mem_bw, 0.0, 0.0);
    auto out = simulate_pair(ve, vh, cap, 3);
    CHECK(out.ve_time_coloc == doctest::Approx(180.0).epsilon(1e-12));
    CHECK(metrics::degradation(out.ve_time_solo, out.ve_time_coloc) ==
          doctest::Approx(80.0).epsilon(1e-12));
    CHECK(f_ve_oracle(ve, vh, cap) == doctest::Approx(1.8).epsilon(1e-12));
}

TEST_CASE("pair: zero-demand co-runner leaves the VE untouched, exactly") {
    ResourceCapacity cap;
    auto ve = mk("ve", Source::VE, 123.0, 4.0, 55.0, 2.0, 1.0);
    auto vh = mk("idle", Source::VH, 60.0, 0.0, 0.0, 0.0, 0.0);
    auto out = simulate_pair(ve, vh, cap, 3);
    CHECK(out.ve_time_coloc == out.ve_time_solo);  // bitwise: no-contention identity
}

TEST_CASE("pair: repeats of the shorter side count the final partial run") {
    ResourceCapacity cap;
    auto ve = mk("short", Source::VE, 50.0, 1.0, 0.0, 0.0, 0.0);
    auto vh = mk("long", Source::VH, 200.0, 1.0, 0.0, 0.0, 0.0);
    auto out = simulate_pair(ve, vh, cap, 1);
    CHECK(out.repeats_of_shorter == 4);

    auto vh2 = mk("long2", Source::VH, 170.0, 1.0, 0.0, 0.0, 0.0);
    CHECK(simulate_pair(ve, vh2, cap, 1).repeats_of_shorter == 4);  // ceil(170/50)

    auto vh3 = mk("equal", Source::VH, 50.0, 1.0, 0.0, 0.0, 0.0);
    CHECK(simulate_pair(ve, vh3, cap, 1).repeats_of_shorter == 1);
}

TEST_CASE("pair: side mismatch is rejected") {
    ResourceCapacity cap;
    auto a = mk("a", Source::VE, 10.0, 1.0, 0.0, 0.0, 0.0);
    auto b = mk("b", Source::VE, 10.0, 1.0, 0.0, 0.0, 0.0);
    CHECK_ERRC(simulate_pair(a, b, cap, 1), Errc::side_mismatch);
}

TEST_CASE("traces span the full co-execution window") {
    ResourceCapacity cap;
    auto ve = mk("ve", Source::VE, 40.0, 1.0, 60.0, 0.0, 0.0);
    auto vh = mk("vh", Source::VH, 90.0, 2.0, 60.0, 0.0, 0.0);
    SynthesisConfig synth;
    auto out = simulate_pair(ve, vh, cap, 5, synth);
    const double window = std::max(out.ve_time_coloc, 90.0 * 1.2);  // f_vh = o_mem = 1.2
    const double last_ve = out.ve_trace.samples.back().timestamp;
    const double last_vh = out.vh_trace.samples.back().timestamp;
    CHECK(last_ve + synth.interval_s >= window - 1e-9);
    CHECK(last_vh + synth.interval_s >= window - 1e-9);
    CHECK(out.vh_trace.has_cpu_load);
    CHECK_FALSE(out.ve_trace.has_cpu_load);
}

TEST_CASE("monotonicity: raising any VH demand never lowers f_ve") {
    ResourceCapacity cap;
    Rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        auto ve = mk("ve", Source::VE, 10.0, rng.uniform(0, 8), rng.uniform(0, cap.mem_bw),
                     rng.uniform(0, cap.io_bw), rng.uniform(0, cap.net_bw),
                     rng.uniform(0, 20000), 0.001);
        auto vh = mk("vh", Source::VH, 10.0, rng.uniform(0, cap.vh_cpu * 0.5),
                     rng.uniform(0, cap.mem_bw * 0.5), rng.uniform(0, cap.io_bw * 0.5),
                     rng.uniform(0, cap.net_bw * 0.5));
        const double f0 = contention(ve, vh, cap).f_ve;
        for (double WorkloadProfile::* field :
             {&WorkloadProfile::cpu_demand, &WorkloadProfile::mem_bw_demand,
              &WorkloadProfile::io_bw_demand, &WorkloadProfile::net_bw_demand}) {
            auto bumped = vh;
            bumped.*field += rng.uniform(0.01, 5.0);
            CHECK(contention(ve, bumped, cap).f_ve >= f0);
        }
    }
}

TEST_CASE("syscall coupling: host CPU oversubscription slows a syscall-issuing VE") {
    ResourceCapacity cap;
    Rng rng(77);
    for (int i = 0; i < 100; ++i) {
        const double vh_cpu = rng.uniform(0.0, cap.vh_cpu);
        const double load = rng.uniform(cap.vh_cpu - vh_cpu + 0.01, 2.0 * cap.vh_cpu);
        auto ve = mk("ve", Source::VE, 10.0, 1.0, 0.0, 0.0, 0.0, load / 0.001, 0.001);
        auto vh = mk("vh", Source::VH, 10.0, vh_cpu, 0.0, 0.0, 0.0);
        REQUIRE(ve.syscall_load() + vh.cpu_demand > cap.vh_cpu);
        CHECK(contention(ve, vh, cap).f_ve > 1.0);
    }
}

TEST_CASE("contention matches the scalar oracle on random pairs") {
    ResourceCapacity cap;
    Rng rng(31);
    for (int i = 0; i < 500; ++i) {
        auto ve = mk("ve", Source::VE, 10.0, rng.uniform(0, 8), rng.uniform(0, cap.mem_bw),
                     rng.uniform(0, cap.io_bw), rng.uniform(0, cap.net_bw),
                     rng.uniform(0, 30000), rng.uniform(0, 0.002));
        auto vh = mk("vh", Source::VH, 10.0, rng.uniform(0, cap.vh_cpu),
                     rng.uniform(0, cap.mem_bw), rng.uniform(0, cap.io_bw),
                     rng.uniform(0, cap.net_bw));
        CHECK(contention(ve, vh, cap).f_ve ==
              doctest::Approx(f_ve_oracle(ve, vh, cap)).epsilon(1e-12));
    }
}

TEST_CASE("synthesized memory traffic integrates to realized bandwidth x window") {
    ResourceCapacity cap;
    auto ve = mk("ve", Source::VE, 100.0, 2.0, 80.0, 0.0, 0.0);
    auto vh = mk("vh", Source::VH, 100.0, 1.0, 60.0, 0.0, 0.0);

    SynthesisConfig exact;
    exact.noise_sigma = 0.0;
    auto out = simulate_pair(ve, vh, cap, 9, exact);
    const double f = contention(ve, vh, cap).f_ve;  // 1.4
    const double window = std::max(out.ve_time_coloc, 100.0 * contention(ve, vh, cap).f_vh);
    double total = 0.0;
    for (const auto& s : out.ve_trace.samples) total += s.read_gb + s.write_gb;
    CHECK(total == doctest::Approx(ve.mem_bw_demand / f * window).epsilon(1e-9));

    SynthesisConfig noisy;  // default sigma 0.05
    auto out2 = simulate_pair(ve, vh, cap, 9, noisy);
    double total2 = 0.0;
    for (const auto& s : out2.ve_trace.samples) total2 += s.read_gb + s.write_gb;
    const double expected = ve.mem_bw_demand / f * window;
    const double n = static_cast<double>(out2.ve_trace.samples.size());
    CHECK(std::abs(total2 - expected) / expected < 6.0 * noisy.noise_sigma / std::sqrt(n));
}

TEST_CASE("generate_dataset: cartesian size, labels, determinism, jobs parity") {
    ResourceCapacity cap;
    std::vector<WorkloadProfile> ves, vhs;
    for (int i = 0; i < 3; ++i) {
        ves.push_back(mk(("ve" + std::to_string(i)).c_str(), Source::VE, 20.0 + i, 1.0,
                         20.0 * i, 0.0, 0.0, 1000.0 * i, 0.001));
        vhs.push_back(mk(("vh" + std::to_string(i)).c_str(), Source::VH, 30.0 + i,
                         4.0 * i, 30.0 * i, 0.0, 0.0));
    }
    DatasetConfig cfg;
    auto recs = generate_dataset(ves, vhs, cap, 42, cfg);
    REQUIRE(recs.size() == 9);
    CHECK(recs[0].ve_name == "ve0");
    CHECK(recs[0].vh_name == "vh0");

    std::ostringstream a, b;
    write_dataset_csv(recs, a);
    write_dataset_csv(generate_dataset(ves, vhs, cap, 42, cfg), b);
    CHECK(a.str() == b.str());

    DatasetConfig par = cfg;
    par.jobs = 3;
    std::ostringstream c;
    write_dataset_csv(generate_dataset(ves, vhs, cap, 42, par), c);
    CHECK(a.str() == c.str());

    std::ostringstream d;
    write_dataset_csv(generate_dataset(ves, vhs, cap, 43, cfg), d);
    CHECK(a.str() != d.str());
}

TEST_CASE("generate_dataset rejects empty profile lists") {
    ResourceCapacity cap;
    std::vector<WorkloadProfile> none;
    std::vector<WorkloadProfile> one = {mk("vh", Source::VH, 10.0, 1.0, 0.0, 0.0, 0.0)};
    CHECK_ERRC(generate_dataset(none, one, cap, 1, {}), Errc::empty_input);
    CHECK_ERRC(generate_dataset(one, none, cap, 1, {}), Errc::empty_input);
}

TEST_CASE("generate_dataset: single pair against an idle host is Low") {
    ResourceCapacity cap;
    std::vector<WorkloadProfile> ves = {mk("ve", Source::VE, 50.0, 2.0, 40.0, 1.0, 0.0)};
    std::vector<WorkloadProfile> vhs = {mk("idle", Source::VH, 60.0, 0.0, 0.0, 0.0, 0.0)};
    auto recs = generate_dataset(ves, vhs, cap, 1, {});
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].degradation.label == Label::Low);
    CHECK(recs[0].degradation.pd_percent == 0.0);
}

TEST_CASE("dataset CSV round-trips records exactly") {
    ResourceCapacity cap;
    auto [ves, vhs] = scenario_suite();
    std::vector<WorkloadProfile> some_ves(ves.begin(), ves.begin() + 2);
    std::vector<WorkloadProfile> some_vhs(vhs.begin(), vhs.begin() + 2);
    auto recs = generate_dataset(some_ves, some_vhs, cap, 5, {});
    std::ostringstream out;
    write_dataset_csv(recs, out);
    std::istringstream in(out.str());
    auto back = read_dataset_csv(in);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].ve_name == recs[i].ve_name);
        CHECK(back[i].t_solo_ve == recs[i].t_solo_ve);
        CHECK(back[i].t_coloc_ve == recs[i].t_coloc_ve);
        CHECK(back[i].degradation.pd_percent == recs[i].degradation.pd_percent);
        CHECK(back[i].degradation.label == recs[i].degradation.label);
        REQUIRE(back[i].features.names == recs[i].features.names);
        for (std::size_t j = 0; j < recs[i].features.values.size(); ++j)
            CHECK(back[i].features.values[j] == recs[i].features.values[j]);
    }
}

TEST_CASE("profiles JSON round-trip") {
    auto [ves, vhs] = scenario_suite();
    std::vector<WorkloadProfile> all = ves;
    all.insert(all.end(), vhs.begin(), vhs.end());
    std::ostringstream out;
    write_profiles_json(all, out);
    std::istringstream in(out.str());
    auto back = read_profiles_json(in);
    REQUIRE(back.size() == all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(back[i].name == all[i].name);
        CHECK(back[i].side == all[i].side);
        CHECK(back[i].base_time == all[i].base_time);
        CHECK(back[i].syscall_rate == all[i].syscall_rate);
        CHECK(back[i].l3mpi_base == all[i].l3mpi_base);
    }
    std::istringstream bad("[{\"name\":\"x\",\"side\":\"VH\",\"base_time\":1,\"oops\":2}]");
    CHECK_ERRC(read_profiles_json(bad), Errc::bad_format);
}

TEST_CASE("scenario suite: structure and qualitative ordering") {
    auto [ves, vhs] = scenario_suite();
    REQUIRE(ves.size() == 7);
    REQUIRE(vhs.size() == 7);
    for (const auto& p : ves) CHECK(p.side == Source::VE);
    for (const auto& p : vhs) CHECK(p.side == Source::VH);

    // Exactly one zero-demand host profile.
    ResourceCapacity cap;
    int zero_count = 0;
    const WorkloadProfile* zero_vh = nullptr;
    for (const auto& p : vhs) {
        if (p.cpu_demand == 0 && p.mem_bw_demand == 0 && p.io_bw_demand == 0 &&
            p.net_bw_demand == 0) {
            ++zero_count;
            zero_vh = &p;
        }
    }
    REQUIRE(zero_count == 1);

    auto pd = [&](const WorkloadProfile& ve, const WorkloadProfile& vh) {
        return (contention(ve, vh, cap).f_ve - 1.0) * 100.0;
    };
    auto find = [](const std::vector<WorkloadProfile>& v, const std::string& name) {
        for (const auto& p : v)
            if (p.name == name) return p;
        REQUIRE(false);
        return v.front();
    };

    for (const auto& ve : ves) CHECK(pd(ve, *zero_vh) < 5.0);

    const double himeno_ior = pd(find(ves, "himeno-like"), find(vhs, "ior-like"));
    const double stream_ior = pd(find(ves, "stream-like"), find(vhs, "ior-like"));
    CHECK(himeno_ior > 100.0);
    CHECK(stream_ior > himeno_ior);

    // stream x ior tops every pair in which both sides demand memory bandwidth,
    // and in fact the whole suite.
    double best = -1.0;
    std::string best_pair;
    for (const auto& ve : ves)
        for (const auto& vh : vhs) {
            const double v = pd(ve, vh);
            if (v > best) {
                best = v;
                best_pair = ve.name + "x" + vh.name;
            }
        }
    CHECK(best_pair == "stream-likexior-like");
    CHECK(best == doctest::Approx(stream_ior));
}
