#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "sx/dataflow.hpp"
#include "sx/sxform.hpp"
#include "sx/workload.hpp"

namespace sx {

struct CellCounts {
    double n_ref = 0;  ///< refresh events (outputs: writes + read-backs)
    double v_ref = 0;  ///< words moved per event
    double words = 0;  ///< n_ref * v_ref
    double bits = 0;   ///< words * kind precision
};

/// Access counts per (memory level, data type). Conventions:
///  - DRAM cells come from the GB refresh positions (DRAM<->GB boundary),
///  - GB cells from the RF refresh positions, v_ref = distinct words served
///    per event across the PE grid (shared/overlapping data read once),
///  - NoC cells from the RF refresh positions, v_ref = per-PE deliveries
///    summed over the grid (n_pe_active x per-PE tile),
///  - RF cells are the per-MAC operand accesses (one per type per MAC).
struct AccessCounts {
    std::array<std::array<CellCounts, 3>, 4> cells{};  ///< [level][kind]
    double n_mac = 0;
    double n_pe_active = 1;
    std::array<double, 3> share{1, 1, 1};         ///< M_j: PEs receiving identical data
    std::array<double, 3> rf_fill_words{0, 0, 0}; ///< per-PE first-tile fill (setup)

    CellCounts& cell(MemLevel l, DataKind k) {
        return cells[static_cast<int>(l)][static_cast<int>(k)];
    }
    const CellCounts& cell(MemLevel l, DataKind k) const {
        return cells[static_cast<int>(l)][static_cast<int>(k)];
    }
    double dram_bits_total() const;
};

/// Closed-form access counts from the refresh locations: refresh events are
/// products of enclosing temporal loop bounds (outputs merge trailing
/// revisit-free loops and add one read back per partial-sum revisit), tile
/// volumes are products of inner associated loop bounds with sliding-window
/// coupling for inputs.
AccessCounts count_analytical(const Dataflow& df, const LayerSpec& layer);

/// Ground-truth interpreter: walks the padded loop nest, firing refreshes and
/// enumerating distinct tile coordinates. Refuses nests beyond `max_iters`
/// total iterations (default 1e8).
AccessCounts count_oracle(const Dataflow& df, const LayerSpec& layer,
                          double max_iters = 1e8);

struct EnergyBreakdown {
    double comp = 0, re = 0;
    std::array<double, 3> dram{}, gb{}, noc{}, rf{};  ///< per data kind, pJ

    double dram_total() const { return dram[0] + dram[1] + dram[2]; }
    double gb_total() const { return gb[0] + gb[1] + gb[2]; }
    double noc_total() const { return noc[0] + noc[1] + noc[2]; }
    double rf_total() const { return rf[0] + rf[1] + rf[2]; }
    double total() const { return comp + re + dram_total() + gb_total() + noc_total() + rf_total(); }
    double on_chip() const { return total() - dram_total(); }
};

struct OperandCounts {
    double i = 1, o = 1, w = 1;  ///< RF accesses per MAC per data type
};

/// E_comp = n_mac * e_mac; per-level data movement = access bits / 8 * unit
/// energy of the level actually accessed.
EnergyBreakdown energy(const AccessCounts& ac, const HardwareConfig& hw, const LayerSpec& layer,
                       const OperandCounts& rf_ops = {});

struct LatencyBreakdown {
    double l_setup = 0, l_dram = 0, l_gb = 0, l_comp = 0;
    double total = 0;  ///< l_setup + max(l_dram, l_gb, l_comp)
};

/// Cycle counts: compute, DRAM->GB streaming, GB->RF streaming, first-tile
/// setup. Bit-serial MACs stretch compute by the mean essential bits.
LatencyBreakdown latency(const AccessCounts& ac, const LayerSpec& layer,
                         const HardwareConfig& hw);

/// Theoretical peak at 100% PE utilization, GOP/s (2 ops per MAC). Bit-serial
/// arrays count 8 serial multipliers as one 8-bit-equivalent MAC.
double throughput_peak(const HardwareConfig& hw);

struct SEAdjust {
    AccessCounts counts;
    double rebuild_energy_pj = 0;
    double rebuilt_words = 0;
};

/// Compression-aware traffic: weight DRAM/GB traffic shrinks by 1/cr, weights
/// are rebuilt once per GB fetch at the RF/PE boundary (RF weight traffic is
/// unchanged), and input/output traffic optionally shrinks by the row-skip
/// factor (1 - sparsity * skip_fraction).
SEAdjust apply_se(const AccessCounts& ac, const StorageStats& stats, const HardwareConfig& hw,
                  const LayerSpec& layer, double skip_fraction = 0.0);

struct PerfReport {
    std::string layer;
    std::string dataflow;
    AccessCounts access;
    EnergyBreakdown energy;
    LatencyBreakdown latency;
    double throughput_gops = 0;
    double edp = 0;  ///< total pJ x total cycles
};

double edp_of(const EnergyBreakdown& e, const LatencyBreakdown& l);

/// Full evaluation of one candidate dataflow on one layer.
PerfReport evaluate(const Dataflow& df, const LayerSpec& layer, const HardwareConfig& hw,
                    const StorageStats* se_stats = nullptr, double skip_fraction = 0.0);

std::string report_json(const PerfReport& r);
std::string report_csv_header();
std::string report_csv_rows(const PerfReport& r);

}  // namespace sx
