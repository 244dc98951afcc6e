#include "sx/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sx {

using json = nlohmann::json;

double AccessCounts::dram_bits_total() const {
    double b = 0;
    for (DataKind k : all_kinds) b += cell(MemLevel::DRAM, k).bits;
    return b;
}

namespace {

struct FlatNest {
    std::vector<LoopEntry> loops;
    std::vector<std::int64_t> dim_weight;  ///< per loop: mixed-radix digit weight

    explicit FlatNest(const Dataflow& df) : loops(df.flattened()) {
        dim_weight.assign(loops.size(), 1);
        for (std::size_t i = 0; i < loops.size(); ++i)
            for (std::size_t j = i + 1; j < loops.size(); ++j)
                if (loops[j].dim == loops[i].dim) dim_weight[i] *= loops[j].bound;
    }
};

int refresh_pos_checked(const Dataflow& df, MemLevel l, DataKind k) {
    try {
        return df.refresh_pos(l, k);
    } catch (const validation_error& e) {
        throw model_error(e.what());
    }
}

double temporal_events_iw(const FlatNest& nest, int pos) {
    double p = 1;
    for (int i = 0; i < pos; ++i)
        if (!nest.loops[i].parallel) p *= static_cast<double>(nest.loops[i].bound);
    return p;
}

/// Output refreshes: residencies G (trailing loops that revisit the same tile
/// accumulate in place), distinct tiles D; traffic events = writes + read
/// backs = G + (G - D).
double temporal_events_o(const FlatNest& nest, int pos) {
    std::vector<std::int64_t> bounds;
    std::vector<bool> assoc;
    for (int i = 0; i < pos; ++i) {
        if (nest.loops[i].parallel) continue;
        bounds.push_back(nest.loops[i].bound);
        assoc.push_back(dim_touches(nest.loops[i].dim, DataKind::O));
    }
    // Residencies change only when an associated digit actually moves, so
    // bound-1 loops never extend the revisit range.
    int last_assoc = -1;
    for (int i = 0; i < static_cast<int>(bounds.size()); ++i)
        if (assoc[i] && bounds[i] > 1) last_assoc = i;
    double g = 1, d = 1;
    for (int i = 0; i <= last_assoc; ++i) g *= static_cast<double>(bounds[i]);
    for (int i = 0; i < static_cast<int>(bounds.size()); ++i)
        if (assoc[i]) d *= static_cast<double>(bounds[i]);
    return 2 * g - d;
}

double temporal_events(const FlatNest& nest, int pos, DataKind k) {
    return k == DataKind::O ? temporal_events_o(nest, pos) : temporal_events_iw(nest, pos);
}

}  // namespace

AccessCounts count_analytical(const Dataflow& df, const LayerSpec& layer) {
    layer.validate();
    FlatNest nest(df);
    AccessCounts ac;
    ac.n_mac = static_cast<double>(layer_macs(layer));

    for (const auto& e : nest.loops)
        if (e.parallel) ac.n_pe_active *= static_cast<double>(e.bound);

    for (DataKind k : all_kinds) {
        double m = 1;
        for (const auto& e : nest.loops)
            if (e.parallel && !dim_touches(e.dim, k)) m *= static_cast<double>(e.bound);
        ac.share[static_cast<int>(k)] = m;
    }

    for (DataKind k : all_kinds) {
        const int pg = refresh_pos_checked(df, MemLevel::GB, k);
        const int pr = refresh_pos_checked(df, MemLevel::RF, k);
        const double bits = static_cast<double>(kind_bits(layer, k));

        auto fill = [&](CellCounts& c, double n_ref, double v_ref) {
            c.n_ref = n_ref;
            c.v_ref = v_ref;
            c.words = n_ref * v_ref;
            c.bits = c.words * bits;
        };
        fill(ac.cell(MemLevel::DRAM, k), temporal_events(nest, pg, k),
             static_cast<double>(union_tile_words(df, pg, k, layer)));
        fill(ac.cell(MemLevel::GB, k), temporal_events(nest, pr, k),
             static_cast<double>(union_tile_words(df, pr, k, layer)));
        const double per_pe = static_cast<double>(per_pe_tile_words(df, pr, k, layer));
        fill(ac.cell(MemLevel::NoC, k), temporal_events(nest, pr, k), ac.n_pe_active * per_pe);
        fill(ac.cell(MemLevel::RF, k), ac.n_mac, 1.0);
        ac.rf_fill_words[static_cast<int>(k)] = per_pe;
    }
    return ac;
}

// ------------------------------------------------------------------ oracle

namespace {

/// Odometer over a list of bounds; invokes fn once per combination.
template <class Fn>
void for_each_combo(const std::vector<std::int64_t>& bounds, Fn&& fn) {
    std::vector<std::int64_t> idx(bounds.size(), 0);
    while (true) {
        fn(idx);
        int i = static_cast<int>(bounds.size()) - 1;
        while (i >= 0) {
            if (++idx[i] < bounds[i]) break;
            idx[i] = 0;
            --i;
        }
        if (i < 0) break;
    }
}

using Coord = std::array<std::int64_t, 4>;

/// Data coordinate of kind k from per-dim padded indices.
Coord coord_of(DataKind k, const std::array<std::int64_t, 6>& v, std::int64_t stride) {
    const std::int64_t m = v[0], c = v[1], e = v[2], f = v[3], r = v[4], s = v[5];
    switch (k) {
        case DataKind::W: return {m, c, r, s};
        case DataKind::O: return {m, e, f, 0};
        case DataKind::I: return {c, e * stride + r, f * stride + s, 0};
    }
    return {};
}

struct OracleWalker {
    const FlatNest& nest;
    const LayerSpec& layer;
    double guard;

    void check(double iters) const {
        if (iters > guard)
            throw model_error("count_oracle: nest of " + std::to_string(iters) +
                              " iterations exceeds the " + std::to_string(guard) + " guard");
    }

    /// Literal passage count of a refresh marker at `pos` (outputs: writes
    /// plus read-backs of revisited tiles).
    double events(int pos, DataKind k) const {
        std::vector<std::int64_t> bounds;
        std::vector<int> which;  // loop index per odometer digit
        double total = 1;
        for (int i = 0; i < pos; ++i) {
            if (nest.loops[i].parallel) continue;
            bounds.push_back(nest.loops[i].bound);
            which.push_back(i);
            total *= static_cast<double>(nest.loops[i].bound);
        }
        check(total);
        if (k != DataKind::O) {
            double passages = 0;
            for_each_combo(bounds, [&](const std::vector<std::int64_t>&) { passages += 1; });
            return passages;
        }
        double residencies = 0;
        std::set<std::vector<std::int64_t>> seen;
        std::vector<std::int64_t> prev;
        bool have_prev = false;
        for_each_combo(bounds, [&](const std::vector<std::int64_t>& idx) {
            std::vector<std::int64_t> tup;
            for (std::size_t d = 0; d < idx.size(); ++d)
                if (dim_touches(nest.loops[which[d]].dim, DataKind::O)) tup.push_back(idx[d]);
            if (!have_prev || tup != prev) {
                residencies += 1;
                prev = tup;
                have_prev = true;
            }
            seen.insert(tup);
        });
        return 2 * residencies - static_cast<double>(seen.size());
    }

    /// Distinct coordinates touched by the loops listed in `iter`.
    double distinct_words(const std::vector<int>& iter, DataKind k) const {
        std::vector<std::int64_t> bounds;
        double total = 1;
        for (int i : iter) {
            bounds.push_back(nest.loops[i].bound);
            total *= static_cast<double>(nest.loops[i].bound);
        }
        check(total);
        std::set<Coord> coords;
        for_each_combo(bounds, [&](const std::vector<std::int64_t>& idx) {
            std::array<std::int64_t, 6> v{};
            for (std::size_t d = 0; d < idx.size(); ++d) {
                const auto& lp = nest.loops[iter[d]];
                if (dim_touches(lp.dim, k))
                    v[static_cast<int>(lp.dim)] += idx[d] * nest.dim_weight[iter[d]];
            }
            coords.insert(coord_of(k, v, layer.U));
        });
        return static_cast<double>(coords.size());
    }

    double union_words(int pos, DataKind k) const {
        std::vector<int> iter;
        for (int i = 0; i < static_cast<int>(nest.loops.size()); ++i)
            if (i >= pos || nest.loops[i].parallel) iter.push_back(i);
        return distinct_words(iter, k);
    }

    /// Per-PE deliveries summed over the parallel grid.
    double deliveries(int pos, DataKind k) const {
        std::vector<int> grid, inner;
        std::vector<std::int64_t> grid_bounds;
        double grid_total = 1;
        for (int i = 0; i < static_cast<int>(nest.loops.size()); ++i) {
            if (nest.loops[i].parallel) {
                grid.push_back(i);
                grid_bounds.push_back(nest.loops[i].bound);
                grid_total *= static_cast<double>(nest.loops[i].bound);
            } else if (i >= pos) {
                inner.push_back(i);
            }
        }
        check(grid_total);
        double sum = 0;
        for_each_combo(grid_bounds, [&](const std::vector<std::int64_t>& gidx) {
            std::vector<std::int64_t> bounds;
            for (int i : inner) bounds.push_back(nest.loops[i].bound);
            std::set<Coord> coords;
            for_each_combo(bounds, [&](const std::vector<std::int64_t>& idx) {
                std::array<std::int64_t, 6> v{};
                for (std::size_t d = 0; d < gidx.size(); ++d) {
                    const auto& lp = nest.loops[grid[d]];
                    if (dim_touches(lp.dim, k))
                        v[static_cast<int>(lp.dim)] += gidx[d] * nest.dim_weight[grid[d]];
                }
                for (std::size_t d = 0; d < idx.size(); ++d) {
                    const auto& lp = nest.loops[inner[d]];
                    if (dim_touches(lp.dim, k))
                        v[static_cast<int>(lp.dim)] += idx[d] * nest.dim_weight[inner[d]];
                }
                coords.insert(coord_of(k, v, layer.U));
            });
            sum += static_cast<double>(coords.size());
        });
        return sum;
    }
};

}  // namespace

AccessCounts count_oracle(const Dataflow& df, const LayerSpec& layer, double max_iters) {
    layer.validate();
    FlatNest nest(df);
    double total = 1;
    for (const auto& e : nest.loops) total *= static_cast<double>(e.bound);
    if (total > max_iters)
        throw model_error("count_oracle: nest of " + std::to_string(total) +
                          " iterations exceeds the " + std::to_string(max_iters) + " guard");

    OracleWalker walk{nest, layer, max_iters};
    AccessCounts ac;
    ac.n_mac = static_cast<double>(layer_macs(layer));
    for (const auto& e : nest.loops)
        if (e.parallel) ac.n_pe_active *= static_cast<double>(e.bound);
    for (DataKind k : all_kinds) {
        double m = 1;
        for (const auto& e : nest.loops)
            if (e.parallel && !dim_touches(e.dim, k)) m *= static_cast<double>(e.bound);
        ac.share[static_cast<int>(k)] = m;
    }

    for (DataKind k : all_kinds) {
        const int pg = refresh_pos_checked(df, MemLevel::GB, k);
        const int pr = refresh_pos_checked(df, MemLevel::RF, k);
        const double bits = static_cast<double>(kind_bits(layer, k));
        auto fill = [&](CellCounts& c, double n_ref, double v_ref) {
            c.n_ref = n_ref;
            c.v_ref = v_ref;
            c.words = n_ref * v_ref;
            c.bits = c.words * bits;
        };
        fill(ac.cell(MemLevel::DRAM, k), walk.events(pg, k), walk.union_words(pg, k));
        fill(ac.cell(MemLevel::GB, k), walk.events(pr, k), walk.union_words(pr, k));
        fill(ac.cell(MemLevel::NoC, k), walk.events(pr, k), walk.deliveries(pr, k));
        fill(ac.cell(MemLevel::RF, k), ac.n_mac, 1.0);
        std::vector<int> inner_temporal;
        for (int i = pr; i < static_cast<int>(nest.loops.size()); ++i)
            if (!nest.loops[i].parallel) inner_temporal.push_back(i);
        ac.rf_fill_words[static_cast<int>(k)] = walk.distinct_words(inner_temporal, k);
    }
    return ac;
}

// ------------------------------------------------------------ cost models

EnergyBreakdown energy(const AccessCounts& ac, const HardwareConfig& hw, const LayerSpec& layer,
                       const OperandCounts& rf_ops) {
    EnergyBreakdown e;
    e.comp = ac.n_mac * hw.energy.mac;
    const double ops[3] = {rf_ops.i, rf_ops.o, rf_ops.w};
    for (DataKind k : all_kinds) {
        const int ki = static_cast<int>(k);
        const double bits = static_cast<double>(kind_bits(layer, k));
        e.dram[ki] = ac.cell(MemLevel::DRAM, k).bits / 8.0 * hw.energy.dram;
        e.gb[ki] = ac.cell(MemLevel::GB, k).bits / 8.0 * hw.energy.gb;
        e.noc[ki] = ac.cell(MemLevel::NoC, k).bits / 8.0 * hw.energy.noc;
        e.rf[ki] = ac.n_mac * ops[ki] * bits / 8.0 * hw.energy.rf;
    }
    return e;
}

LatencyBreakdown latency(const AccessCounts& ac, const LayerSpec& layer,
                         const HardwareConfig& hw) {
    for (DataKind k : all_kinds)
        if (hw.bw_gb[k] <= 0 || hw.bw_rf[k] <= 0 || hw.bw_dram <= 0)
            throw config_error("latency: bandwidths must be > 0");

    LatencyBreakdown l;
    const double serial = hw.bit_serial ? hw.avg_essential_bits : 1.0;
    l.l_comp = std::ceil(ac.n_mac / ac.n_pe_active) * hw.t_mac * serial;

    double setup_dram = 0, setup_gb = 0;
    for (DataKind k : all_kinds) {
        const int ki = static_cast<int>(k);
        const double bits = static_cast<double>(kind_bits(layer, k));
        const auto& dc = ac.cell(MemLevel::DRAM, k);
        const auto& gc = ac.cell(MemLevel::GB, k);
        l.l_dram = std::max(l.l_dram,
                            dc.n_ref * std::ceil(dc.v_ref * bits / std::min(hw.bw_gb[k], hw.bw_dram)));
        l.l_gb = std::max(l.l_gb, gc.n_ref * std::ceil(gc.v_ref * bits / hw.bw_gb[k]));
        if (k != DataKind::O) {
            setup_dram = std::max(setup_dram,
                                  std::ceil(dc.v_ref * bits / std::min(hw.bw_gb[k], hw.bw_dram)));
            setup_gb = std::max(setup_gb, std::ceil(ac.rf_fill_words[ki] * bits /
                                                    std::min(hw.bw_rf[k], hw.bw_gb[k])));
        }
    }
    l.l_setup = std::max(setup_dram, setup_gb);
    l.total = l.l_setup + std::max({l.l_dram, l.l_gb, l.l_comp});
    return l;
}

double throughput_peak(const HardwareConfig& hw) {
    hw.validate();
    // 8 bit-serial multiplier lanes stand in for one 8-bit MAC at peak.
    const double macs_per_cycle =
        hw.bit_serial ? static_cast<double>(hw.n_pe) / 8.0 : static_cast<double>(hw.n_pe);
    return 2.0 * macs_per_cycle * hw.freq_hz / 1e9;
}

SEAdjust apply_se(const AccessCounts& ac, const StorageStats& stats, const HardwareConfig& hw,
                  const LayerSpec& layer, double skip_fraction) {
    if (!(stats.cr > 0)) throw config_error("apply_se: compression rate must be > 0");
    if (skip_fraction < 0 || skip_fraction > 1)
        throw config_error("apply_se: skip_fraction in [0,1]");
    SEAdjust adj;
    adj.counts = ac;
    adj.rebuilt_words = ac.cell(MemLevel::GB, DataKind::W).words;
    adj.rebuild_energy_pj = hw.energy.re * adj.rebuilt_words * layer.bits_w / 8.0;

    auto scale_cell = [](CellCounts& c, double f) {
        c.v_ref *= f;
        c.words *= f;
        c.bits *= f;
    };
    // Compressed coefficients and basis move instead of dense weights.
    scale_cell(adj.counts.cell(MemLevel::DRAM, DataKind::W), 1.0 / stats.cr);
    scale_cell(adj.counts.cell(MemLevel::GB, DataKind::W), 1.0 / stats.cr);
    // Vector sparsity skips the matching activation rows.
    const double keep = std::max(0.0, 1.0 - stats.sparsity * skip_fraction);
    for (DataKind k : {DataKind::I, DataKind::O})
        for (MemLevel l : {MemLevel::DRAM, MemLevel::GB, MemLevel::NoC})
            scale_cell(adj.counts.cell(l, k), keep);
    return adj;
}

double edp_of(const EnergyBreakdown& e, const LatencyBreakdown& l) {
    return e.total() * l.total;
}

PerfReport evaluate(const Dataflow& df, const LayerSpec& layer, const HardwareConfig& hw,
                    const StorageStats* se_stats, double skip_fraction) {
    PerfReport r;
    r.layer = layer.name;
    r.dataflow = df.encode();
    r.access = count_analytical(df, layer);
    if (se_stats) {
        SEAdjust adj = apply_se(r.access, *se_stats, hw, layer, skip_fraction);
        r.access = adj.counts;
        r.energy = energy(r.access, hw, layer);
        r.energy.re = adj.rebuild_energy_pj;
    } else {
        r.energy = energy(r.access, hw, layer);
    }
    r.latency = latency(r.access, layer, hw);
    r.throughput_gops = 2.0 * r.access.n_mac / (r.latency.total / hw.freq_hz) / 1e9;
    r.edp = edp_of(r.energy, r.latency);
    return r;
}

// ----------------------------------------------------------- serialization

static json cell_json(const CellCounts& c) {
    return json{{"n_ref", c.n_ref}, {"v_ref", c.v_ref}, {"words", c.words}, {"bits", c.bits}};
}

std::string report_json(const PerfReport& r) {
    json j;
    j["schema_version"] = 1;
    j["layer"] = r.layer;
    j["dataflow"] = r.dataflow;
    json cells = json::object();
    for (MemLevel l : all_levels) {
        json row = json::object();
        for (DataKind k : all_kinds) row[to_string(k)] = cell_json(r.access.cell(l, k));
        cells[to_string(l)] = row;
    }
    j["access"] = {{"cells", cells},
                   {"n_mac", r.access.n_mac},
                   {"n_pe_active", r.access.n_pe_active},
                   {"share", {{"I", r.access.share[0]}, {"O", r.access.share[1]}, {"W", r.access.share[2]}}}};
    j["energy_pj"] = {{"comp", r.energy.comp},
                      {"re", r.energy.re},
                      {"dram", {{"I", r.energy.dram[0]}, {"O", r.energy.dram[1]}, {"W", r.energy.dram[2]}}},
                      {"gb", {{"I", r.energy.gb[0]}, {"O", r.energy.gb[1]}, {"W", r.energy.gb[2]}}},
                      {"noc", {{"I", r.energy.noc[0]}, {"O", r.energy.noc[1]}, {"W", r.energy.noc[2]}}},
                      {"rf", {{"I", r.energy.rf[0]}, {"O", r.energy.rf[1]}, {"W", r.energy.rf[2]}}},
                      {"total", r.energy.total()}};
    j["latency_cycles"] = {{"l_setup", r.latency.l_setup},
                           {"l_dram", r.latency.l_dram},
                           {"l_gb", r.latency.l_gb},
                           {"l_comp", r.latency.l_comp},
                           {"total", r.latency.total}};
    j["throughput_gops"] = r.throughput_gops;
    j["edp_pj_cycles"] = r.edp;
    return j.dump(2);
}

std::string report_csv_header() {
    return "layer,level,kind,n_ref,v_ref,words,bits,energy_pj";
}

static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string report_csv_rows(const PerfReport& r) {
    std::ostringstream os;
    for (MemLevel l : all_levels) {
        for (DataKind k : all_kinds) {
            const auto& c = r.access.cell(l, k);
            const int ki = static_cast<int>(k);
            double e = 0;
            switch (l) {
                case MemLevel::DRAM: e = r.energy.dram[ki]; break;
                case MemLevel::GB: e = r.energy.gb[ki]; break;
                case MemLevel::NoC: e = r.energy.noc[ki]; break;
                case MemLevel::RF: e = r.energy.rf[ki]; break;
            }
            os << r.layer << "," << to_string(l) << "," << to_string(k) << "," << num(c.n_ref)
               << "," << num(c.v_ref) << "," << num(c.words) << "," << num(c.bits) << ","
               << num(e) << "\n";
        }
    }
    os << r.layer << ",COMP,-,,,,," << num(r.energy.comp) << "\n";
    os << r.layer << ",RE,-,,,,," << num(r.energy.re) << "\n";
    return os.str();
}

}  // namespace sx
