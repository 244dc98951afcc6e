#include "sx/dataflow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

namespace sx {

using json = nlohmann::json;

std::string to_string(Dim d) {
    switch (d) {
        case Dim::M: return "M";
        case Dim::C: return "C";
        case Dim::E: return "E";
        case Dim::F: return "F";
        case Dim::R: return "R";
        case Dim::S: return "S";
    }
    return "?";
}

std::string to_string(MemLevel l) {
    switch (l) {
        case MemLevel::DRAM: return "DRAM";
        case MemLevel::GB: return "GB";
        case MemLevel::NoC: return "NoC";
        case MemLevel::RF: return "RF";
    }
    return "?";
}

std::string to_string(DataKind k) {
    switch (k) {
        case DataKind::I: return "I";
        case DataKind::O: return "O";
        case DataKind::W: return "W";
    }
    return "?";
}

static Dim dim_from_char(char c) {
    switch (c) {
        case 'M': return Dim::M;
        case 'C': return Dim::C;
        case 'E': return Dim::E;
        case 'F': return Dim::F;
        case 'R': return Dim::R;
        case 'S': return Dim::S;
    }
    throw parse_error(std::string("unknown dim '") + c + "'");
}

bool dim_touches(Dim d, DataKind k) {
    switch (k) {
        case DataKind::W:
            return d == Dim::M || d == Dim::C || d == Dim::R || d == Dim::S;
        case DataKind::O:
            return d == Dim::M || d == Dim::E || d == Dim::F;
        case DataKind::I:
            return d == Dim::C || d == Dim::E || d == Dim::F || d == Dim::R || d == Dim::S;
    }
    return false;
}

int kind_bits(const LayerSpec& layer, DataKind k) {
    switch (k) {
        case DataKind::I: return layer.bits_i;
        case DataKind::O: return layer.bits_o;
        case DataKind::W: return layer.bits_w;
    }
    return 8;
}

std::string to_string(Style s) {
    switch (s) {
        case Style::row_stationary: return "row_stationary";
        case Style::output_stationary: return "output_stationary";
        case Style::weight_stationary: return "weight_stationary";
        case Style::no_local_reuse: return "no_local_reuse";
        case Style::custom: return "custom";
    }
    return "?";
}

Style style_from_string(const std::string& s) {
    if (s == "row_stationary" || s == "rs") return Style::row_stationary;
    if (s == "output_stationary" || s == "os") return Style::output_stationary;
    if (s == "weight_stationary" || s == "ws") return Style::weight_stationary;
    if (s == "no_local_reuse" || s == "nlr") return Style::no_local_reuse;
    if (s == "custom") return Style::custom;
    throw parse_error("unknown dataflow style '" + s + "'");
}

std::vector<LoopEntry> Dataflow::flattened() const {
    std::vector<LoopEntry> out;
    for (const auto& lvl : level_loops) out.insert(out.end(), lvl.begin(), lvl.end());
    return out;
}

int Dataflow::refresh_pos(MemLevel l, DataKind k) const {
    auto it = refresh.find({l, k});
    if (it == refresh.end())
        throw validation_error("dataflow: missing refresh position for " + to_string(l) + "." +
                               to_string(k));
    return it->second;
}

std::int64_t Dataflow::padded_bound(Dim d) const {
    std::int64_t p = 1;
    for (const auto& lvl : level_loops)
        for (const auto& e : lvl)
            if (e.dim == d) p *= e.bound;
    return p;
}

std::string Dataflow::encode() const {
    std::ostringstream os;
    os << "style=" << to_string(style);
    const char* names[4] = {"DRAM", "GB", "NoC", "RF"};
    for (int l = 0; l < 4; ++l) {
        os << ";" << names[l] << ":";
        bool first = true;
        for (const auto& e : level_loops[l]) {
            if (!first) os << ",";
            first = false;
            os << to_string(e.dim) << (e.parallel ? "*" : "") << "=" << e.bound;
        }
    }
    os << ";refresh=";
    bool first = true;
    for (const auto& [key, pos] : refresh) {
        if (!first) os << ",";
        first = false;
        os << to_string(key.first) << "." << to_string(key.second) << "@" << pos;
    }
    return os.str();
}

Dataflow decode_dataflow(const std::string& text) {
    Dataflow df;
    std::stringstream ss(text);
    std::string field;
    auto level_index = [](const std::string& s) -> int {
        if (s == "DRAM") return 0;
        if (s == "GB") return 1;
        if (s == "NoC") return 2;
        if (s == "RF") return 3;
        throw parse_error("dataflow encoding: unknown level '" + s + "'");
    };
    while (std::getline(ss, field, ';')) {
        if (field.empty()) continue;
        const auto eqcol = field.find(':');
        if (field.rfind("style=", 0) == 0) {
            df.style = style_from_string(field.substr(6));
        } else if (field.rfind("refresh=", 0) == 0) {
            std::stringstream rs(field.substr(8));
            std::string item;
            while (std::getline(rs, item, ',')) {
                const auto dot = item.find('.');
                const auto at = item.find('@');
                if (dot == std::string::npos || at == std::string::npos)
                    throw parse_error("dataflow encoding: bad refresh '" + item + "'");
                MemLevel lvl = MemLevel::DRAM;
                const std::string ls = item.substr(0, dot);
                lvl = static_cast<MemLevel>(level_index(ls));
                const DataKind k = item[dot + 1] == 'I'   ? DataKind::I
                                   : item[dot + 1] == 'O' ? DataKind::O
                                                          : DataKind::W;
                df.refresh[{lvl, k}] = std::stoi(item.substr(at + 1));
            }
        } else if (eqcol != std::string::npos) {
            const int lvl = level_index(field.substr(0, eqcol));
            std::stringstream es(field.substr(eqcol + 1));
            std::string item;
            while (std::getline(es, item, ',')) {
                if (item.empty()) continue;
                LoopEntry e;
                e.dim = dim_from_char(item[0]);
                std::size_t p = 1;
                if (p < item.size() && item[p] == '*') {
                    e.parallel = true;
                    ++p;
                }
                if (p >= item.size() || item[p] != '=')
                    throw parse_error("dataflow encoding: bad loop '" + item + "'");
                e.bound = std::stoll(item.substr(p + 1));
                df.level_loops[lvl].push_back(e);
            }
        } else {
            throw parse_error("dataflow encoding: bad field '" + field + "'");
        }
    }
    return df;
}

double& KindValues::operator[](DataKind k) {
    switch (k) {
        case DataKind::I: return i;
        case DataKind::O: return o;
        default: return w;
    }
}

double KindValues::operator[](DataKind k) const {
    switch (k) {
        case DataKind::I: return i;
        case DataKind::O: return o;
        default: return w;
    }
}

void HardwareConfig::validate() const {
    auto fail = [&](const std::string& why) {
        throw config_error("hardware '" + name + "': " + why);
    };
    if (n_pe < 1) fail("n_pe must be >= 1");
    const std::int64_t prod = dim_m * dim_c * dim_f;
    if (prod > 1 && prod != n_pe) fail("n_pe must equal dim_m * dim_c * dim_f");
    for (DataKind k : all_kinds) {
        if (rf_bits[k] <= 0 || gb_bits[k] <= 0) fail("capacities must be > 0");
        if (bw_gb[k] <= 0 || bw_rf[k] <= 0) fail("bandwidths must be > 0");
    }
    if (bw_dram <= 0) fail("DRAM bandwidth must be > 0");
    if (freq_hz <= 0) fail("frequency must be > 0");
    if (energy.mac <= 0 || energy.re <= 0 || energy.rf <= 0 || energy.noc <= 0 ||
        energy.gb <= 0 || energy.dram <= 0)
        fail("unit energies must be > 0");
    if (t_mac <= 0) fail("t_mac must be > 0");
    if (avg_essential_bits <= 0) fail("avg_essential_bits must be > 0");
}

// -------------------------------------------------------------- tile math

static std::int64_t layer_bound(const LayerSpec& l, Dim d) {
    switch (d) {
        case Dim::M: return l.M;
        case Dim::C: return l.kind == LayerKind::dwconv ? 1 : l.C;
        case Dim::E: return l.E;
        case Dim::F: return l.F;
        case Dim::R: return l.R;
        case Dim::S: return l.S;
    }
    return 1;
}

// Distinct sliding-window coordinates covered by `tiles` output steps of
// stride U against a kernel tile of size `ktile`.
static std::int64_t window_extent(std::int64_t tiles, std::int64_t ktile, std::int64_t stride) {
    if (stride >= ktile) return tiles * ktile;
    return (tiles - 1) * stride + ktile;
}

namespace {
struct TileDims {
    std::int64_t m = 1, c = 1, e = 1, f = 1, r = 1, s = 1;
    std::int64_t& of(Dim d) {
        switch (d) {
            case Dim::M: return m;
            case Dim::C: return c;
            case Dim::E: return e;
            case Dim::F: return f;
            case Dim::R: return r;
            case Dim::S: return s;
        }
        return m;
    }
};
}  // namespace

/// Words of kind k in a tile spanning the given per-dim factors.
static std::int64_t tile_words(const TileDims& t, DataKind k, std::int64_t stride) {
    switch (k) {
        case DataKind::W: return t.m * t.c * t.r * t.s;
        case DataKind::O: return t.m * t.e * t.f;
        case DataKind::I:
            return t.c * window_extent(t.e, t.r, stride) * window_extent(t.f, t.s, stride);
    }
    return 0;
}

// Per-PE tile at a refresh position: inner temporal loops only.
static std::int64_t per_pe_tile(const std::vector<LoopEntry>& flat, int pos, DataKind k,
                                std::int64_t stride) {
    TileDims t;
    for (std::size_t i = pos; i < flat.size(); ++i)
        if (!flat[i].parallel && dim_touches(flat[i].dim, k)) t.of(flat[i].dim) *= flat[i].bound;
    return tile_words(t, k, stride);
}

// Distinct words served per refresh event across the whole PE grid: inner
// loops (temporal and parallel) plus enclosing parallel loops of associated
// dims, window-coupled for inputs.
static std::int64_t union_tile(const std::vector<LoopEntry>& flat, int pos, DataKind k,
                               std::int64_t stride) {
    TileDims t;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const bool inner = static_cast<int>(i) >= pos;
        if (!dim_touches(flat[i].dim, k)) continue;
        if (inner || flat[i].parallel) t.of(flat[i].dim) *= flat[i].bound;
    }
    return tile_words(t, k, stride);
}

std::int64_t per_pe_tile_words(const Dataflow& df, int pos, DataKind k, const LayerSpec& layer) {
    return per_pe_tile(df.flattened(), pos, k, layer.U);
}

std::int64_t union_tile_words(const Dataflow& df, int pos, DataKind k, const LayerSpec& layer) {
    return union_tile(df.flattened(), pos, k, layer.U);
}

// ---------------------------------------------------------------- validate

ValidationReport validate(const Dataflow& df, const LayerSpec& layer, const HardwareConfig& hw) {
    ValidationReport rep;
    auto flag = [&](const std::string& w) { rep.violations.push_back({w}); };

    const auto flat = df.flattened();
    const int nloops = static_cast<int>(flat.size());

    for (const auto& e : flat)
        if (e.bound < 1) flag("loop bound < 1 for dim " + to_string(e.dim));

    // Tiling-cover invariant: padded product >= layer bound, minimal cover.
    for (Dim d : all_dims) {
        const std::int64_t bound = layer_bound(layer, d);
        const std::int64_t padded = df.padded_bound(d);
        if (padded < bound)
            flag("dim " + to_string(d) + ": factors cover " + std::to_string(padded) +
                 " < layer bound " + std::to_string(bound));
        for (const auto& lvl : df.level_loops)
            for (const auto& e : lvl)
                if (e.dim == d && e.bound > 1 && (padded / e.bound) * (e.bound - 1) >= bound)
                    flag("dim " + to_string(d) + ": non-minimal cover (factor " +
                         std::to_string(e.bound) + " reducible)");
    }

    // Parallel loops only at the NoC level.
    for (int l = 0; l < 4; ++l)
        for (const auto& e : df.level_loops[l]) {
            if (l == 2 && !e.parallel) flag("NoC loop " + to_string(e.dim) + " not parallel");
            if (l != 2 && e.parallel)
                flag("parallel loop " + to_string(e.dim) + " outside NoC level");
        }

    std::int64_t par = 1;
    for (const auto& e : flat)
        if (e.parallel) par *= e.bound;
    if (par > hw.n_pe)
        flag("parallel product " + std::to_string(par) + " > n_pe " + std::to_string(hw.n_pe));

    // Refresh positions: one per (level in {GB, RF}) x kind, in range, the RF
    // refresh at or inside the GB refresh, and both consistent with the
    // hierarchy: a GB refresh fills the shared buffer (at or above the NoC
    // parallel block), an RF refresh fills per-PE registers (below it).
    int par_begin = nloops, par_end = 0;
    for (int i = 0; i < nloops; ++i)
        if (flat[i].parallel) {
            par_begin = std::min(par_begin, i);
            par_end = std::max(par_end, i + 1);
        }
    for (DataKind k : all_kinds) {
        for (MemLevel l : {MemLevel::GB, MemLevel::RF}) {
            auto it = df.refresh.find({l, k});
            if (it == df.refresh.end()) {
                flag("missing refresh position " + to_string(l) + "." + to_string(k));
                continue;
            }
            if (it->second < 0 || it->second > nloops)
                flag("refresh " + to_string(l) + "." + to_string(k) + " out of range");
        }
        auto g = df.refresh.find({MemLevel::GB, k});
        auto r = df.refresh.find({MemLevel::RF, k});
        if (g != df.refresh.end() && r != df.refresh.end() && r->second < g->second)
            flag("refresh RF." + to_string(k) + " outside GB." + to_string(k));
        if (g != df.refresh.end() && g->second > par_begin)
            flag("refresh GB." + to_string(k) + " below the NoC level");
        if (r != df.refresh.end() && r->second < par_end)
            flag("refresh RF." + to_string(k) + " above the NoC level");
    }

    // Capacity: per-PE RF tile and whole-array GB tile per data type.
    for (DataKind k : all_kinds) {
        auto r = df.refresh.find({MemLevel::RF, k});
        if (r != df.refresh.end() && r->second >= 0 && r->second <= nloops) {
            const double bits =
                static_cast<double>(per_pe_tile(flat, r->second, k, layer.U)) * kind_bits(layer, k);
            if (bits > hw.rf_bits[k])
                flag("RF capacity (" + to_string(k) + "): tile " + std::to_string(bits) +
                     " bits > " + std::to_string(hw.rf_bits[k]));
        }
        auto g = df.refresh.find({MemLevel::GB, k});
        if (g != df.refresh.end() && g->second >= 0 && g->second <= nloops) {
            const double bits =
                static_cast<double>(union_tile(flat, g->second, k, layer.U)) * kind_bits(layer, k);
            if (bits > hw.gb_bits[k])
                flag("GB capacity (" + to_string(k) + "): tile " + std::to_string(bits) +
                     " bits > " + std::to_string(hw.gb_bits[k]));
        }
    }
    return rep;
}

// ----------------------------------------------------------------- covers

std::vector<std::vector<std::int64_t>> minimal_covers(std::int64_t bound, int slots) {
    std::vector<std::vector<std::int64_t>> out;
    if (slots < 1 || bound < 1) return out;
    std::vector<std::int64_t> cur(slots, 1);
    auto minimal = [&](std::int64_t product) {
        for (int i = 0; i < slots; ++i)
            if (cur[i] > 1 && (product / cur[i]) * (cur[i] - 1) >= bound) return false;
        return true;
    };
    std::function<void(int, std::int64_t)> rec = [&](int slot, std::int64_t prod) {
        if (slot == slots - 1) {
            // Last factor is forced to the minimal completion.
            cur[slot] = (bound + prod - 1) / prod;
            if (minimal(prod * cur[slot])) out.push_back(cur);
            return;
        }
        const std::int64_t cap = (bound + prod - 1) / prod;
        for (std::int64_t f = 1; f <= cap; ++f) {
            cur[slot] = f;
            rec(slot + 1, prod * f);
        }
        cur[slot] = 1;
    };
    rec(0, 1);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ----------------------------------------------------------------- styles

namespace {

/// One slot of a style template: which dim lives at which level, in order.
struct Slot {
    Dim dim;
    int level;  ///< 0 DRAM, 1 GB, 2 NoC, 3 RF
};

struct StyleTemplate {
    std::vector<Slot> slots;  ///< flattened order (levels are contiguous)
    // refresh positions in the flattened nest
    int gb_i, gb_w, gb_o, rf_i, rf_w, rf_o;
};

const StyleTemplate& style_template(Style s) {
    // Output stationary: psums pinned in the MAC; inputs refreshed per filter
    // group, weights streamed per output tile.
    static const StyleTemplate os{
        {{Dim::M, 0},
         {Dim::M, 1}, {Dim::E, 1}, {Dim::F, 1},
         {Dim::E, 2}, {Dim::F, 2},
         {Dim::C, 3}, {Dim::R, 3}, {Dim::S, 3}},
        1, 2, 4, 6, 6, 9};
    // Weight stationary: every E/F loop sits inside the RF weight refresh, so
    // each weight tile is fetched once.
    static const StyleTemplate ws{
        {{Dim::M, 0}, {Dim::C, 0},
         {Dim::M, 1}, {Dim::C, 1},
         {Dim::M, 2}, {Dim::C, 2},
         {Dim::E, 3}, {Dim::F, 3}, {Dim::R, 3}, {Dim::S, 3}},
        2, 4, 4, 8, 6, 10};
    // Row stationary: a kernel row and an input row pinned per PE; PEs span
    // kernel rows x output rows; 1D convolutions sweep F. Inputs and outputs
    // stream into the GB per output-row strip, weights per filter group.
    static const StyleTemplate rs{
        {{Dim::M, 0}, {Dim::C, 0},
         {Dim::M, 1}, {Dim::C, 1}, {Dim::E, 1},
         {Dim::R, 2}, {Dim::E, 2},
         {Dim::F, 3}, {Dim::S, 3}},
        5, 3, 5, 7, 7, 9};
    // No local reuse: RF holds nothing; every operand streams from the GB in
    // small tiles.
    static const StyleTemplate nlr{
        {{Dim::M, 0}, {Dim::C, 0},
         {Dim::M, 1}, {Dim::E, 1}, {Dim::F, 1}, {Dim::C, 1}, {Dim::R, 1}, {Dim::S, 1},
         {Dim::M, 2}, {Dim::C, 2}},
        4, 6, 5, 10, 10, 10};
    switch (s) {
        case Style::output_stationary: return os;
        case Style::weight_stationary: return ws;
        case Style::row_stationary: return rs;
        case Style::no_local_reuse: return nlr;
        default: throw config_error("no template for style 'custom'");
    }
}

Dataflow instantiate(Style style, const StyleTemplate& t,
                     const std::map<Dim, std::vector<std::int64_t>>& factors) {
    Dataflow df;
    df.style = style;
    std::map<Dim, std::size_t> next;
    for (const auto& s : t.slots) {
        LoopEntry e;
        e.dim = s.dim;
        e.parallel = s.level == 2;
        e.bound = factors.at(s.dim).at(next[s.dim]++);
        df.level_loops[s.level].push_back(e);
    }
    df.refresh[{MemLevel::GB, DataKind::I}] = t.gb_i;
    df.refresh[{MemLevel::GB, DataKind::W}] = t.gb_w;
    df.refresh[{MemLevel::GB, DataKind::O}] = t.gb_o;
    df.refresh[{MemLevel::RF, DataKind::I}] = t.rf_i;
    df.refresh[{MemLevel::RF, DataKind::W}] = t.rf_w;
    df.refresh[{MemLevel::RF, DataKind::O}] = t.rf_o;
    return df;
}

std::vector<int> dim_slot_counts(const StyleTemplate& t) {
    std::vector<int> counts(6, 0);
    for (const auto& s : t.slots) counts[static_cast<int>(s.dim)]++;
    return counts;
}

}  // namespace

Dataflow preset(Style style, const LayerSpec& layer, const HardwareConfig& hw) {
    if (style == Style::custom)
        throw config_error("preset: style must be one of the four named styles");
    layer.validate();
    hw.validate();
    const StyleTemplate& t = style_template(style);
    const auto counts = dim_slot_counts(t);

    // Per-dim candidate covers, sorted by preference: largest parallel factor
    // first (fill the array), then innermost-heavy splits (most reuse).
    struct DimChoices {
        Dim dim;
        std::vector<std::vector<std::int64_t>> covers;
    };
    std::vector<DimChoices> choices;
    for (Dim d : all_dims) {
        const int k = counts[static_cast<int>(d)];
        if (k == 0) continue;
        int par_slot = -1, idx = 0;
        for (const auto& s : t.slots)
            if (s.dim == d) {
                if (s.level == 2) par_slot = idx;
                ++idx;
            }
        auto covers = minimal_covers(layer_bound(layer, d), k);
        auto key = [par_slot](const std::vector<std::int64_t>& v) {
            std::vector<std::int64_t> k2;
            if (par_slot >= 0) k2.push_back(v[par_slot]);
            for (int i = static_cast<int>(v.size()) - 1; i >= 0; --i) k2.push_back(v[i]);
            return k2;
        };
        std::sort(covers.begin(), covers.end(),
                  [&](const auto& a, const auto& b) { return key(a) > key(b); });
        choices.push_back({d, std::move(covers)});
    }

    // First-fit depth-first search for a validate-passing assignment; the
    // top-preference assignment is the fallback when nothing fits.
    std::map<Dim, std::vector<std::int64_t>> assign;
    std::optional<Dataflow> found;
    std::int64_t leaves = 0;
    const std::int64_t leaf_cap = 50'000;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (found || leaves >= leaf_cap) return;
        if (i == choices.size()) {
            ++leaves;
            Dataflow df = instantiate(style, t, assign);
            if (validate(df, layer, hw).pass()) found = std::move(df);
            return;
        }
        for (const auto& c : choices[i].covers) {
            assign[choices[i].dim] = c;
            rec(i + 1);
            if (found || leaves >= leaf_cap) return;
        }
    };
    rec(0);
    if (found) return *found;
    for (const auto& ch : choices) assign[ch.dim] = ch.covers.front();
    return instantiate(style, t, assign);
}

EnumerateResult enumerate_tilings(const LayerSpec& layer, const HardwareConfig& hw, Style style,
                                  const EnumerateLimits& limits,
                                  const std::function<bool(const Dataflow&)>& consumer) {
    if (style == Style::custom)
        throw config_error("enumerate_tilings: style must be one of the four named styles");
    layer.validate();
    hw.validate();
    const StyleTemplate& t = style_template(style);
    const auto counts = dim_slot_counts(t);

    std::vector<Dim> dims;
    std::vector<std::vector<std::vector<std::int64_t>>> choices;
    for (Dim d : all_dims) {
        const int k = counts[static_cast<int>(d)];
        if (k == 0) continue;
        dims.push_back(d);
        choices.push_back(minimal_covers(layer_bound(layer, d), k));
    }

    EnumerateResult res;
    std::map<Dim, std::vector<std::int64_t>> assign;
    bool stop = false;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (stop) return;
        if (i == dims.size()) {
            Dataflow df = instantiate(style, t, assign);
            if (!validate(df, layer, hw).pass()) return;
            if (res.yielded >= limits.max_candidates) {
                res.truncated = true;
                stop = true;
                return;
            }
            ++res.yielded;
            if (!consumer(df)) stop = true;
            return;
        }
        for (const auto& c : choices[i]) {
            assign[dims[i]] = c;
            rec(i + 1);
            if (stop) return;
        }
    };
    rec(0);
    return res;
}

// ------------------------------------------------------------------- JSON

static json kind_values_json(const KindValues& v) {
    return json{{"I", v.i}, {"O", v.o}, {"W", v.w}};
}

static KindValues kind_values_from(const json& j) {
    KindValues v;
    if (j.is_number()) {
        v.i = v.o = v.w = j.get<double>();
    } else {
        v.i = j.at("I").get<double>();
        v.o = j.at("O").get<double>();
        v.w = j.at("W").get<double>();
    }
    return v;
}

std::string serialize_hardware(const HardwareConfig& hw) {
    json j;
    j["schema_version"] = 1;
    j["name"] = hw.name;
    j["dim_m"] = hw.dim_m;
    j["dim_c"] = hw.dim_c;
    j["dim_f"] = hw.dim_f;
    j["n_pe"] = hw.n_pe;
    j["rf_bits"] = kind_values_json(hw.rf_bits);
    j["gb_bits"] = kind_values_json(hw.gb_bits);
    j["bw_gb"] = kind_values_json(hw.bw_gb);
    j["bw_rf"] = kind_values_json(hw.bw_rf);
    j["bw_dram"] = hw.bw_dram;
    j["freq_hz"] = hw.freq_hz;
    j["energy"] = {{"mac", hw.energy.mac}, {"re", hw.energy.re},   {"rf", hw.energy.rf},
                   {"noc", hw.energy.noc}, {"gb", hw.energy.gb},   {"dram", hw.energy.dram}};
    j["t_mac"] = hw.t_mac;
    j["bit_serial"] = hw.bit_serial;
    j["avg_essential_bits"] = hw.avg_essential_bits;
    return j.dump(2);
}

HardwareConfig load_hardware(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("hardware: ") + e.what());
    }
    HardwareConfig hw;
    try {
        hw.name = j.value("name", std::string("unnamed"));
        hw.dim_m = j.value("dim_m", std::int64_t{1});
        hw.dim_c = j.value("dim_c", std::int64_t{1});
        hw.dim_f = j.value("dim_f", std::int64_t{1});
        hw.n_pe = j.at("n_pe").get<std::int64_t>();
        hw.rf_bits = kind_values_from(j.at("rf_bits"));
        hw.gb_bits = kind_values_from(j.at("gb_bits"));
        hw.bw_gb = kind_values_from(j.at("bw_gb"));
        hw.bw_rf = kind_values_from(j.at("bw_rf"));
        hw.bw_dram = j.at("bw_dram").get<double>();
        hw.freq_hz = j.at("freq_hz").get<double>();
        const auto& e = j.at("energy");
        hw.energy.mac = e.at("mac").get<double>();
        hw.energy.re = e.at("re").get<double>();
        hw.energy.rf = e.at("rf").get<double>();
        hw.energy.noc = e.at("noc").get<double>();
        hw.energy.gb = e.at("gb").get<double>();
        hw.energy.dram = e.at("dram").get<double>();
        hw.t_mac = j.value("t_mac", 1.0);
        hw.bit_serial = j.value("bit_serial", false);
        hw.avg_essential_bits = j.value("avg_essential_bits", 8.0);
    } catch (const json::exception& e) {
        throw parse_error(std::string("hardware: ") + e.what());
    }
    hw.validate();
    return hw;
}

HardwareConfig load_hardware_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open hardware file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_hardware(ss.str());
}

}  // namespace sx
