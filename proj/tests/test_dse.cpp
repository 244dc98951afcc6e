#include <doctest.h>

#include "sx/dse.hpp"
#include "sx/presets.hpp"

using namespace sx;

namespace {

Workload one_layer(std::int64_t m, std::int64_t c, std::int64_t ef, std::int64_t k = 1) {
    Workload w;
    w.name = "w";
    LayerSpec l;
    l.name = "l0";
    l.M = m;
    l.C = c;
    l.E = l.F = ef;
    l.R = l.S = k;
    w.layers.push_back(l);
    return w;
}

HardwareConfig small_hw(std::int64_t n_pe = 16) {
    HardwareConfig hw = hardware_preset("65nm");
    hw.name = "small";
    hw.dim_m = hw.dim_c = hw.dim_f = 1;
    hw.n_pe = n_pe;
    return hw;
}

}  // namespace

TEST_CASE("single-candidate space returns that candidate") {
    Workload w = one_layer(1, 1, 1, 1);
    HardwareConfig hw = small_hw(1);
    Objective obj;
    DseOptions opts;
    opts.styles = {Style::output_stationary};
    DseResult r = optimize(w, hw, obj, SearchMode::exhaustive, opts);
    REQUIRE(r.feasible);
    REQUIRE(r.layers.size() == 1);
    CHECK(r.layers[0].candidates == 1);
}

TEST_CASE("pruned equals exhaustive, bit-identical winner") {
    for (Metric m : {Metric::energy, Metric::latency, Metric::edp}) {
        Workload w = one_layer(6, 4, 5, 3);
        HardwareConfig hw = small_hw(16);
        Objective obj;
        obj.metric = m;
        DseResult a = optimize(w, hw, obj, SearchMode::exhaustive);
        DseResult b = optimize(w, hw, obj, SearchMode::pruned);
        REQUIRE(a.feasible);
        REQUIRE(b.feasible);
        CHECK(a.layers[0].best.encode() == b.layers[0].best.encode());
        CHECK(a.total_energy_pj == b.total_energy_pj);
        CHECK(a.total_latency_cycles == b.total_latency_cycles);
        CHECK(a.total_edp == b.total_edp);
    }
}

TEST_CASE("optimum is never worse than any style preset") {
    Workload w = one_layer(8, 4, 6, 3);
    HardwareConfig hw = small_hw(64);
    Objective obj;
    obj.metric = Metric::energy;
    DseResult r = optimize(w, hw, obj, SearchMode::pruned);
    REQUIRE(r.feasible);
    for (Style s : {Style::row_stationary, Style::output_stationary, Style::weight_stationary,
                    Style::no_local_reuse}) {
        Dataflow df = preset(s, w.layers[0], hw);
        if (!validate(df, w.layers[0], hw).pass()) continue;
        PerfReport rep = evaluate(df, w.layers[0], hw);
        CHECK(r.layers[0].report.energy.total() <= rep.energy.total() + 1e-9);
    }
}

TEST_CASE("l_max below the compute floor is infeasible naming l_comp") {
    Workload w = one_layer(4, 4, 4, 3);
    HardwareConfig hw = small_hw(4);
    Objective obj;
    obj.metric = Metric::energy;
    obj.l_max_cycles = 1.0;  // below any achievable latency
    obj.per_layer_constraints = true;
    DseResult r = optimize(w, hw, obj, SearchMode::exhaustive);
    CHECK(!r.feasible);
    REQUIRE(!r.binding.empty());
    CHECK(r.binding[0].find("l_max") != std::string::npos);
    CHECK(r.binding[0].find("l_comp") != std::string::npos);
}

TEST_CASE("end-to-end constraint check on totals") {
    Workload w = one_layer(2, 2, 2, 1);
    HardwareConfig hw = small_hw(4);
    Objective obj;
    obj.metric = Metric::energy;
    obj.l_max_cycles = 1.0;
    DseResult r = optimize(w, hw, obj, SearchMode::pruned);
    CHECK(!r.feasible);
    CHECK(r.binding[0].find("l_max") != std::string::npos);

    obj.l_max_cycles.reset();
    obj.th_min_gops = 1e12;
    DseResult r2 = optimize(w, hw, obj, SearchMode::pruned);
    CHECK(!r2.feasible);
    CHECK(r2.binding[0].find("th_min") != std::string::npos);
}

TEST_CASE("optimize is deterministic") {
    Workload w = one_layer(6, 3, 4, 3);
    HardwareConfig hw = small_hw(16);
    Objective obj;
    obj.metric = Metric::edp;
    DseResult a = optimize(w, hw, obj, SearchMode::pruned);
    DseResult b = optimize(w, hw, obj, SearchMode::pruned);
    CHECK(dse_result_json(a) == dse_result_json(b));
}

TEST_CASE("objective flips can change the winner but both stay valid") {
    Workload w = one_layer(8, 6, 6, 3);
    HardwareConfig hw = small_hw(16);
    // Starve bandwidth so latency-optimal and energy-optimal may diverge.
    for (DataKind k : all_kinds) hw.bw_gb[k] = 2;
    hw.bw_dram = 2;
    Objective oe, ol;
    oe.metric = Metric::energy;
    ol.metric = Metric::latency;
    DseResult re = optimize(w, hw, oe, SearchMode::pruned);
    DseResult rl = optimize(w, hw, ol, SearchMode::pruned);
    REQUIRE(re.feasible);
    REQUIRE(rl.feasible);
    CHECK(re.layers[0].report.energy.total() <= rl.layers[0].report.energy.total() + 1e-9);
    CHECK(rl.layers[0].report.latency.total <= re.layers[0].report.latency.total + 1e-9);
}
