#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sx/errors.hpp"

namespace sx {

enum class LayerKind { conv, fc, dwconv };

std::string to_string(LayerKind k);
LayerKind layer_kind_from_string(const std::string& s);

/// One DNN layer. E/F are post-padding output sizes; padding itself is the
/// caller's concern. Biases and activation functions carry no cost here.
struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::conv;
    std::int64_t M = 1;  ///< output channels (fc: output neurons)
    std::int64_t C = 1;  ///< input channels (fc: input neurons)
    std::int64_t R = 1, S = 1;  ///< kernel height/width
    std::int64_t E = 1, F = 1;  ///< output map height/width
    std::int64_t U = 1;         ///< stride
    int bits_i = 8, bits_o = 8, bits_w = 8;

    /// Throws validation_error naming the layer when invariants fail.
    void validate() const;
};

struct DataBits {
    std::int64_t i = 0, o = 0, w = 0;
};

/// Total multiply-accumulates: M*C*R*S*E*F (dwconv: C*R*S*E*F).
std::int64_t layer_macs(const LayerSpec& layer);

/// Dense footprints in bits per data type. Input height H = (E-1)*U + R,
/// width = (F-1)*U + S.
DataBits layer_footprints(const LayerSpec& layer);

/// Dense weight word count (C multiplier 1 for dwconv).
std::int64_t layer_weight_count(const LayerSpec& layer);

struct Workload {
    std::string name;
    std::vector<LayerSpec> layers;

    const LayerSpec& layer(const std::string& lname) const;
};

/// Parse and validate a workload from its JSON document.
Workload load_workload(const std::string& json_text);
Workload load_workload_file(const std::string& path);
std::string serialize_workload(const Workload& w);

}  // namespace sx
