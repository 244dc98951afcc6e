#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sx/perfmodel.hpp"

namespace sx {

enum class Metric { energy, latency, edp };
std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

struct Objective {
    Metric metric = Metric::energy;
    std::optional<double> th_min_gops;   ///< minimum throughput
    std::optional<double> l_max_cycles;  ///< maximum latency
    bool per_layer_constraints = false;  ///< enforce bounds on every layer
};

enum class SearchMode { exhaustive, pruned };

struct LayerResult {
    std::string layer;
    Dataflow best;
    PerfReport report;
    std::int64_t candidates = 0;  ///< evaluated (pruned candidates included)
    bool truncated = false;
};

struct DseResult {
    bool feasible = true;
    std::vector<std::string> binding;  ///< violated constraints when infeasible
    std::vector<LayerResult> layers;
    double total_energy_pj = 0;
    double total_latency_cycles = 0;
    double total_edp = 0;
    double throughput_gops = 0;  ///< end-to-end, whole workload
    std::int64_t candidates = 0;
    bool truncated = false;
};

struct DseOptions {
    std::vector<Style> styles = {Style::row_stationary, Style::output_stationary,
                                 Style::weight_stationary, Style::no_local_reuse};
    EnumerateLimits limits;
    const std::vector<StorageStats>* se_stats = nullptr;  ///< per layer, optional
    double skip_fraction = 0.0;
};

/// Search the tiling space of each layer for the dataflow minimizing the
/// objective. Pruned mode skips candidates whose admissible lower bound
/// (compute + DRAM movement) already exceeds the incumbent and returns the
/// same optimum as exhaustive. Ties break by (energy, latency, encoding).
DseResult optimize(const Workload& w, const HardwareConfig& hw, const Objective& obj,
                   SearchMode mode, const DseOptions& opts = {});

std::string dse_result_json(const DseResult& r);

}  // namespace sx
