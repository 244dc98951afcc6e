#include "sx/dse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace sx {

using json = nlohmann::json;

std::string to_string(Metric m) {
    switch (m) {
        case Metric::energy: return "energy";
        case Metric::latency: return "latency";
        case Metric::edp: return "edp";
    }
    return "?";
}

Metric metric_from_string(const std::string& s) {
    if (s == "energy") return Metric::energy;
    if (s == "latency") return Metric::latency;
    if (s == "edp") return Metric::edp;
    throw parse_error("unknown objective metric '" + s + "'");
}

namespace {

double metric_value(Metric m, const PerfReport& r) {
    switch (m) {
        case Metric::energy: return r.energy.total();
        case Metric::latency: return r.latency.total;
        case Metric::edp: return r.edp;
    }
    return 0;
}

/// Admissible lower bound from compute energy plus DRAM movement alone; every
/// remaining term of the true metric is nonnegative.
double lower_bound(Metric m, const AccessCounts& ac, const EnergyBreakdown& partial,
                   const LatencyBreakdown& lat) {
    const double e_lb = partial.comp + partial.dram_total();
    switch (m) {
        case Metric::energy: return e_lb;
        case Metric::latency: return lat.l_comp;
        case Metric::edp: return e_lb * lat.l_comp;
    }
    (void)ac;
    return 0;
}

bool better(Metric m, const PerfReport& a, const std::string& enc_a, const PerfReport& b,
            const std::string& enc_b) {
    const double ma = metric_value(m, a), mb = metric_value(m, b);
    if (ma != mb) return ma < mb;
    if (a.energy.total() != b.energy.total()) return a.energy.total() < b.energy.total();
    if (a.latency.total != b.latency.total) return a.latency.total < b.latency.total;
    return enc_a < enc_b;
}

}  // namespace

DseResult optimize(const Workload& w, const HardwareConfig& hw, const Objective& obj,
                   SearchMode mode, const DseOptions& opts) {
    hw.validate();
    if (opts.se_stats && opts.se_stats->size() != w.layers.size())
        throw config_error("optimize: per-layer SE stats count mismatch");

    DseResult res;
    for (std::size_t li = 0; li < w.layers.size(); ++li) {
        const LayerSpec& layer = w.layers[li];
        const StorageStats* stats = opts.se_stats ? &(*opts.se_stats)[li] : nullptr;

        LayerResult lr;
        lr.layer = layer.name;
        bool have_best = false;
        double best_metric = std::numeric_limits<double>::infinity();
        std::string best_enc;
        double latency_floor = std::numeric_limits<double>::infinity();
        double th_ceiling = 0;

        auto consider = [&](const Dataflow& df) -> bool {
            ++lr.candidates;
            const std::string enc = df.encode();

            if (mode == SearchMode::pruned && have_best) {
                AccessCounts ac = count_analytical(df, layer);
                if (stats) ac = apply_se(ac, *stats, hw, layer, opts.skip_fraction).counts;
                EnergyBreakdown part;
                part.comp = ac.n_mac * hw.energy.mac;
                for (DataKind k : all_kinds)
                    part.dram[static_cast<int>(k)] =
                        ac.cell(MemLevel::DRAM, k).bits / 8.0 * hw.energy.dram;
                LatencyBreakdown lat;
                const double serial = hw.bit_serial ? hw.avg_essential_bits : 1.0;
                lat.l_comp = std::ceil(ac.n_mac / ac.n_pe_active) * hw.t_mac * serial;
                if (lower_bound(obj.metric, ac, part, lat) > best_metric) return true;
            }

            PerfReport rep = evaluate(df, layer, hw, stats, opts.skip_fraction);
            latency_floor = std::min(latency_floor, rep.latency.total);
            th_ceiling = std::max(th_ceiling, rep.throughput_gops);

            if (obj.per_layer_constraints) {
                if (obj.l_max_cycles && rep.latency.total > *obj.l_max_cycles) return true;
                if (obj.th_min_gops && rep.throughput_gops < *obj.th_min_gops) return true;
            }
            if (!have_best || better(obj.metric, rep, enc, lr.report, lr.report.dataflow)) {
                lr.best = df;
                lr.report = std::move(rep);
                have_best = true;
                best_metric = metric_value(obj.metric, lr.report);
            }
            return true;
        };

        for (Style style : opts.styles) {
            auto er = enumerate_tilings(layer, hw, style, opts.limits, consider);
            lr.truncated = lr.truncated || er.truncated;
        }

        if (!have_best) {
            res.feasible = false;
            if (obj.per_layer_constraints && obj.l_max_cycles &&
                latency_floor > *obj.l_max_cycles) {
                res.binding.push_back("l_max: layer '" + layer.name + "' latency floor " +
                                      std::to_string(latency_floor) + " > " +
                                      std::to_string(*obj.l_max_cycles) + " (l_comp bound)");
            }
            if (obj.per_layer_constraints && obj.th_min_gops && th_ceiling < *obj.th_min_gops) {
                res.binding.push_back("th_min: layer '" + layer.name + "' best throughput " +
                                      std::to_string(th_ceiling) + " < " +
                                      std::to_string(*obj.th_min_gops));
            }
            if (res.binding.empty())
                res.binding.push_back("no legal dataflow for layer '" + layer.name + "'");
            res.candidates += lr.candidates;
            continue;
        }

        res.candidates += lr.candidates;
        res.truncated = res.truncated || lr.truncated;
        res.total_energy_pj += lr.report.energy.total();
        res.total_latency_cycles += lr.report.latency.total;
        res.layers.push_back(std::move(lr));
    }

    if (!res.feasible) return res;

    res.total_edp = res.total_energy_pj * res.total_latency_cycles;
    double total_macs = 0;
    for (const auto& l : w.layers) total_macs += static_cast<double>(layer_macs(l));
    res.throughput_gops =
        2.0 * total_macs / (res.total_latency_cycles / hw.freq_hz) / 1e9;

    if (!obj.per_layer_constraints) {
        if (obj.l_max_cycles && res.total_latency_cycles > *obj.l_max_cycles) {
            res.feasible = false;
            res.binding.push_back("l_max: total latency " + std::to_string(res.total_latency_cycles) +
                                  " > " + std::to_string(*obj.l_max_cycles));
        }
        if (obj.th_min_gops && res.throughput_gops < *obj.th_min_gops) {
            res.feasible = false;
            res.binding.push_back("th_min: workload throughput " +
                                  std::to_string(res.throughput_gops) + " < " +
                                  std::to_string(*obj.th_min_gops));
        }
    }
    return res;
}

std::string dse_result_json(const DseResult& r) {
    json j;
    j["schema_version"] = 1;
    j["feasible"] = r.feasible;
    j["binding"] = r.binding;
    j["candidates"] = r.candidates;
    j["truncated"] = r.truncated;
    j["totals"] = {{"energy_pj", r.total_energy_pj},
                   {"latency_cycles", r.total_latency_cycles},
                   {"edp_pj_cycles", r.total_edp},
                   {"throughput_gops", r.throughput_gops}};
    j["layers"] = json::array();
    for (const auto& l : r.layers) {
        j["layers"].push_back({{"layer", l.layer},
                               {"dataflow", l.best.encode()},
                               {"candidates", l.candidates},
                               {"truncated", l.truncated},
                               {"metric", {{"energy_pj", l.report.energy.total()},
                                           {"latency_cycles", l.report.latency.total},
                                           {"edp_pj_cycles", l.report.edp},
                                           {"throughput_gops", l.report.throughput_gops}}}});
    }
    return j.dump(2);
}

}  // namespace sx
