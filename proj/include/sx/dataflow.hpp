#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sx/workload.hpp"

namespace sx {

enum class Dim { M, C, E, F, R, S };
enum class MemLevel { DRAM, GB, NoC, RF };
enum class DataKind { I, O, W };

constexpr std::array<Dim, 6> all_dims{Dim::M, Dim::C, Dim::E, Dim::F, Dim::R, Dim::S};
constexpr std::array<MemLevel, 4> all_levels{MemLevel::DRAM, MemLevel::GB, MemLevel::NoC,
                                             MemLevel::RF};
constexpr std::array<DataKind, 3> all_kinds{DataKind::I, DataKind::O, DataKind::W};

std::string to_string(Dim d);
std::string to_string(MemLevel l);
std::string to_string(DataKind k);

/// Whether loops over dim d index data of kind k. Inputs couple to E/F
/// through the sliding window as well as to C/R/S; M loops revisit them.
bool dim_touches(Dim d, DataKind k);

/// Precision of data kind k in the given layer.
int kind_bits(const LayerSpec& layer, DataKind k);

enum class Style { row_stationary, output_stationary, weight_stationary, no_local_reuse, custom };
std::string to_string(Style s);
Style style_from_string(const std::string& s);

struct LoopEntry {
    Dim dim;
    std::int64_t bound = 1;
    bool parallel = false;  ///< NoC-level spatial loop
};

/// A refresh position p means: inside the bodies of flattened loops [0, p),
/// outside loops [p, n). Refresh positions exist for the GB and RF levels;
/// DRAM traffic follows from GB refreshes and NoC traffic from RF refreshes.
struct Dataflow {
    Style style = Style::custom;
    std::array<std::vector<LoopEntry>, 4> level_loops;  ///< DRAM, GB, NoC, RF order
    std::map<std::pair<MemLevel, DataKind>, int> refresh;

    std::vector<LoopEntry> flattened() const;
    int refresh_pos(MemLevel l, DataKind k) const;  ///< throws if missing
    std::int64_t padded_bound(Dim d) const;         ///< product of d's factors
    std::string encode() const;                     ///< stable text encoding
};

Dataflow decode_dataflow(const std::string& text);

struct KindValues {
    double i = 0, o = 0, w = 0;
    double& operator[](DataKind k);
    double operator[](DataKind k) const;
};

struct UnitEnergies {
    double mac = 0, re = 0, rf = 0, noc = 0, gb = 0, dram = 0;  ///< pJ per 8-bit
};

struct HardwareConfig {
    std::string name;
    std::int64_t dim_m = 1, dim_c = 1, dim_f = 1;
    std::int64_t n_pe = 1;
    KindValues rf_bits;                 ///< RF capacity per data type, bits
    KindValues gb_bits;                 ///< GB capacity per data type, bits
    KindValues bw_gb;                   ///< GB bandwidth per data type, bits/cycle
    KindValues bw_rf;                   ///< RF fill bandwidth per data type, bits/cycle
    double bw_dram = 0;                 ///< DRAM bandwidth, bits/cycle
    double freq_hz = 0;
    UnitEnergies energy;
    double t_mac = 1.0;                 ///< cycles per MAC
    bool bit_serial = false;
    double avg_essential_bits = 8.0;    ///< mean nonzero activation bits

    void validate() const;
};

struct Violation {
    std::string what;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool pass() const { return violations.empty(); }
};

/// Checks the tiling-cover invariant per dim (>= layer bound, minimal ceiling
/// cover), parallel placement, NoC parallel product <= n_pe, per-type RF/GB
/// tile footprints against capacities, and refresh-position sanity.
ValidationReport validate(const Dataflow& df, const LayerSpec& layer, const HardwareConfig& hw);

/// Canonical per-style dataflow with greedy-fill tiling factors.
Dataflow preset(Style style, const LayerSpec& layer, const HardwareConfig& hw);

struct EnumerateLimits {
    std::int64_t max_candidates = 1'000'000;
};

struct EnumerateResult {
    bool truncated = false;
    std::int64_t yielded = 0;
};

/// Stream every dataflow of the style's template whose per-dim factors are
/// minimal ceiling covers of the layer bounds and that passes validate.
/// The consumer returns false to stop early.
EnumerateResult enumerate_tilings(const LayerSpec& layer, const HardwareConfig& hw, Style style,
                                  const EnumerateLimits& limits,
                                  const std::function<bool(const Dataflow&)>& consumer);

/// All minimal ceiling-cover factor tuples of `bound` over `slots` positions:
/// product >= bound, and decrementing any single factor breaks coverage.
std::vector<std::vector<std::int64_t>> minimal_covers(std::int64_t bound, int slots);

/// Words of kind k one PE's refresh at position `pos` pulls: the tile spanned
/// by the inner temporal loops, window-coupled for inputs.
std::int64_t per_pe_tile_words(const Dataflow& df, int pos, DataKind k, const LayerSpec& layer);

/// Distinct words of kind k served per refresh event across the PE grid:
/// inner loops plus enclosing parallel loops of associated dims.
std::int64_t union_tile_words(const Dataflow& df, int pos, DataKind k, const LayerSpec& layer);

std::string serialize_hardware(const HardwareConfig& hw);
HardwareConfig load_hardware(const std::string& json_text);
HardwareConfig load_hardware_file(const std::string& path);

}  // namespace sx
