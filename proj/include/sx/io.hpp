#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sx/sxform.hpp"

namespace sx {

/// Binary weight tensor: magic "SETN", version u32, ndims u32, dims u32[],
/// payload little-endian f32, row-major.
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> values;

    std::int64_t count() const;
};

Tensor read_setn(const std::string& path);
void write_setn(const std::string& path, const Tensor& t);

/// CSV twin of SETN: first line the dims, then one value per line.
Tensor read_tensor_csv(const std::string& path);
void write_tensor_csv(const std::string& path, const Tensor& t);

/// Write via temp file + rename.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// FNV-1a 64-bit content hash, hex encoded.
std::string fnv1a_hex(const std::string& content);

struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> inputs;  ///< path, hash
    std::string params_json = "{}";
    std::uint64_t seed = 0;
    std::string timestamp;  ///< excluded from determinism guarantees
};

std::string manifest_json(const RunManifest& m);

std::string serialize_seform(const SEForm& form);
SEForm load_seform(const std::string& json_text);

std::string stats_json(const std::vector<std::pair<std::string, StorageStats>>& per_layer);
std::vector<std::pair<std::string, StorageStats>> load_stats(const std::string& json_text);

extern const char* const kToolVersion;

}  // namespace sx
