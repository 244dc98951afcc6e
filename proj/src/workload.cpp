#include "sx/workload.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sx {

using json = nlohmann::json;

std::string to_string(LayerKind k) {
    switch (k) {
        case LayerKind::conv: return "conv";
        case LayerKind::fc: return "fc";
        case LayerKind::dwconv: return "dwconv";
    }
    return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "conv") return LayerKind::conv;
    if (s == "fc") return LayerKind::fc;
    if (s == "dwconv") return LayerKind::dwconv;
    throw parse_error("unknown layer kind '" + s + "'");
}

void LayerSpec::validate() const {
    auto fail = [&](const std::string& why) {
        throw validation_error("layer '" + name + "': " + why);
    };
    if (name.empty()) fail("empty name");
    if (M < 1 || C < 1 || R < 1 || S < 1 || E < 1 || F < 1 || U < 1)
        fail("all dimensions must be >= 1");
    if (bits_i < 1 || bits_o < 1 || bits_w < 1) fail("precisions must be >= 1 bit");
    if (kind == LayerKind::fc && (R != 1 || S != 1 || E != 1 || F != 1 || U != 1))
        fail("fc requires R=S=E=F=U=1");
    if (kind == LayerKind::dwconv && M != C) fail("dwconv requires M = C (channel multiplier 1)");
}

std::int64_t layer_macs(const LayerSpec& l) {
    std::int64_t per_out = l.C * l.R * l.S;
    if (l.kind == LayerKind::dwconv) per_out = l.R * l.S;
    return l.M * per_out * l.E * l.F;
}

std::int64_t layer_weight_count(const LayerSpec& l) {
    if (l.kind == LayerKind::dwconv) return l.M * l.R * l.S;
    return l.M * l.C * l.R * l.S;
}

DataBits layer_footprints(const LayerSpec& l) {
    DataBits b;
    b.w = layer_weight_count(l) * l.bits_w;
    b.o = l.M * l.E * l.F * l.bits_o;
    const std::int64_t h = (l.E - 1) * l.U + l.R;
    const std::int64_t wd = (l.F - 1) * l.U + l.S;
    b.i = l.C * h * wd * l.bits_i;
    return b;
}

const LayerSpec& Workload::layer(const std::string& lname) const {
    for (const auto& l : layers)
        if (l.name == lname) return l;
    throw validation_error("workload '" + name + "' has no layer '" + lname + "'");
}

static LayerSpec layer_from_json(const json& j) {
    LayerSpec l;
    try {
        l.name = j.at("name").get<std::string>();
        l.kind = layer_kind_from_string(j.at("kind").get<std::string>());
        l.M = j.at("M").get<std::int64_t>();
        l.C = j.at("C").get<std::int64_t>();
        l.R = j.value("R", std::int64_t{1});
        l.S = j.value("S", std::int64_t{1});
        l.E = j.value("E", std::int64_t{1});
        l.F = j.value("F", std::int64_t{1});
        l.U = j.value("U", std::int64_t{1});
        l.bits_i = j.value("bits_i", 8);
        l.bits_o = j.value("bits_o", 8);
        l.bits_w = j.value("bits_w", 8);
    } catch (const json::exception& e) {
        throw parse_error(std::string("layer object: ") + e.what());
    }
    l.validate();
    return l;
}

Workload load_workload(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("workload: ") + e.what());
    }
    Workload w;
    try {
        w.name = j.at("name").get<std::string>();
        if (!j.at("layers").is_array() || j.at("layers").empty())
            throw parse_error("workload: 'layers' must be a nonempty array");
        for (const auto& lj : j.at("layers")) w.layers.push_back(layer_from_json(lj));
    } catch (const json::exception& e) {
        throw parse_error(std::string("workload: ") + e.what());
    }
    std::set<std::string> names;
    for (const auto& l : w.layers)
        if (!names.insert(l.name).second)
            throw validation_error("duplicate layer name '" + l.name + "'");
    return w;
}

Workload load_workload_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open workload file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_workload(ss.str());
}

std::string serialize_workload(const Workload& w) {
    json j;
    j["schema_version"] = 1;
    j["name"] = w.name;
    j["layers"] = json::array();
    for (const auto& l : w.layers) {
        json lj;
        lj["name"] = l.name;
        lj["kind"] = to_string(l.kind);
        lj["M"] = l.M;
        lj["C"] = l.C;
        lj["R"] = l.R;
        lj["S"] = l.S;
        lj["E"] = l.E;
        lj["F"] = l.F;
        lj["U"] = l.U;
        lj["bits_i"] = l.bits_i;
        lj["bits_o"] = l.bits_o;
        lj["bits_w"] = l.bits_w;
        j["layers"].push_back(lj);
    }
    return j.dump(2);
}

}  // namespace sx
