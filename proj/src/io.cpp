#include "sx/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sx {

using json = nlohmann::json;

const char* const kToolVersion = "0.1.0";

std::int64_t Tensor::count() const {
    std::int64_t n = 1;
    for (auto d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw io_error("truncated SETN file '" + path + "'");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

Tensor read_setn(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "'");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "SETN", 4) != 0)
        throw io_error("'" + path + "' is not a SETN file");
    const std::uint32_t version = get_u32(in, path);
    if (version != 1) throw io_error("'" + path + "': unsupported SETN version");
    const std::uint32_t ndims = get_u32(in, path);
    if (ndims == 0 || ndims > 8) throw io_error("'" + path + "': bad dim count");
    Tensor t;
    for (std::uint32_t i = 0; i < ndims; ++i) t.dims.push_back(get_u32(in, path));
    t.values.resize(t.count());
    for (auto& v : t.values) {
        const std::uint32_t raw = get_u32(in, path);
        float f;
        std::memcpy(&f, &raw, 4);
        if (!std::isfinite(f)) throw io_error("'" + path + "': non-finite weight");
        v = f;
    }
    return t;
}

void write_setn(const std::string& path, const Tensor& t) {
    std::ostringstream os(std::ios::binary);
    os.write("SETN", 4);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put_u32(os, d);
    for (float v : t.values) {
        std::uint32_t raw;
        std::memcpy(&raw, &v, 4);
        put_u32(os, raw);
    }
    atomic_write(path, os.str());
}

Tensor read_tensor_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw io_error("'" + path + "': empty CSV");
    Tensor t;
    std::stringstream hs(line);
    std::string item;
    while (std::getline(hs, item, ','))
        if (!item.empty()) t.dims.push_back(static_cast<std::uint32_t>(std::stoul(item)));
    if (t.dims.empty()) throw io_error("'" + path + "': no dims in header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.values.push_back(std::stof(line));
    }
    if (static_cast<std::int64_t>(t.values.size()) != t.count())
        throw io_error("'" + path + "': value count does not match dims");
    return t;
}

void write_tensor_csv(const std::string& path, const Tensor& t) {
    std::ostringstream os;
    for (std::size_t i = 0; i < t.dims.size(); ++i) os << (i ? "," : "") << t.dims[i];
    os << "\n";
    for (float v : t.values) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
        os << buf << "\n";
    }
    atomic_write(path, os.str());
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot write '" + tmp + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw io_error("short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw io_error("cannot rename '" + tmp + "' to '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a_hex(const std::string& content) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : content) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string manifest_json(const RunManifest& m) {
    json j;
    j["schema_version"] = 1;
    j["tool_version"] = kToolVersion;
    j["command"] = m.command;
    j["seed"] = m.seed;
    j["params"] = json::parse(m.params_json);
    j["inputs"] = json::array();
    for (const auto& [path, hash] : m.inputs)
        j["inputs"].push_back({{"path", path}, {"fnv1a64", hash}});
    j["timestamp"] = m.timestamp;
    return j.dump(2);
}

// ------------------------------------------------------------------ SEForm

std::string serialize_seform(const SEForm& f) {
    json j;
    j["schema_version"] = 1;
    j["rows"] = f.ce.rows();
    j["cols"] = f.ce.cols();
    j["p_set"] = f.p_set;
    j["row_mask"] = f.row_mask;
    j["channel_mask"] = f.channel_mask;
    j["iterations"] = f.iterations;
    j["normalized_every_iteration"] = f.normalized_every_iteration;
    // Coefficients as (row, col, sign, exponent) over the nonzeros.
    json coeffs = json::array();
    for (Eigen::Index i = 0; i < f.ce.rows(); ++i)
        for (Eigen::Index c = 0; c < f.ce.cols(); ++c) {
            const double v = f.ce(i, c);
            if (v == 0.0) continue;
            coeffs.push_back({i, c, std::signbit(v) ? -1 : 1, std::ilogb(v)});
        }
    j["coeffs"] = coeffs;
    json basis = json::array();
    for (Eigen::Index i = 0; i < f.basis.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < f.basis.cols(); ++c) row.push_back(f.basis(i, c));
        basis.push_back(row);
    }
    j["basis"] = basis;
    json trace = json::array();
    for (const auto& t : f.trace)
        trace.push_back({{"rel_error", t.rel_error},
                         {"row_sparsity", t.row_sparsity},
                         {"basis_drift", t.basis_drift}});
    j["trace"] = trace;
    return j.dump(2);
}

SEForm load_seform(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("seform: ") + e.what());
    }
    SEForm f;
    try {
        const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
        const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
        f.ce = Matrix::Zero(rows, cols);
        for (const auto& c : j.at("coeffs")) {
            const Eigen::Index i = c.at(0).get<Eigen::Index>();
            const Eigen::Index col = c.at(1).get<Eigen::Index>();
            const int sign = c.at(2).get<int>();
            const int p = c.at(3).get<int>();
            f.ce(i, col) = sign * std::ldexp(1.0, p);
        }
        const auto& basis = j.at("basis");
        f.basis = Matrix::Zero(basis.size(), basis.empty() ? 0 : basis[0].size());
        for (Eigen::Index i = 0; i < f.basis.rows(); ++i)
            for (Eigen::Index c = 0; c < f.basis.cols(); ++c)
                f.basis(i, c) = basis[i][c].get<double>();
        f.p_set = j.at("p_set").get<std::vector<int>>();
        f.row_mask = j.at("row_mask").get<std::vector<bool>>();
        f.channel_mask = j.value("channel_mask", std::vector<bool>{});
        f.iterations = j.value("iterations", 0);
        f.normalized_every_iteration = j.value("normalized_every_iteration", true);
        for (const auto& t : j.value("trace", json::array()))
            f.trace.push_back({t.at("rel_error").get<double>(),
                               t.at("row_sparsity").get<double>(),
                               t.at("basis_drift").get<double>()});
    } catch (const json::exception& e) {
        throw parse_error(std::string("seform: ") + e.what());
    }
    return f;
}

std::string stats_json(const std::vector<std::pair<std::string, StorageStats>>& per_layer) {
    json j;
    j["schema_version"] = 1;
    j["layers"] = json::array();
    StorageStats total;
    for (const auto& [name, st] : per_layer) {
        j["layers"].push_back({{"layer", name},
                               {"bits_dense", st.bits_dense},
                               {"bits_basis", st.bits_basis},
                               {"bits_ce", st.bits_ce},
                               {"bits_index", st.bits_index},
                               {"cr", st.cr},
                               {"sparsity", st.sparsity},
                               {"nonzero_elems", st.nonzero_elems},
                               {"total_rows", st.total_rows}});
        total.bits_dense += st.bits_dense;
        total.bits_basis += st.bits_basis;
        total.bits_ce += st.bits_ce;
        total.bits_index += st.bits_index;
        total.nonzero_elems += st.nonzero_elems;
        total.total_rows += st.total_rows;
    }
    if (total.bits_se() > 0)
        total.cr = static_cast<double>(total.bits_dense) / static_cast<double>(total.bits_se());
    double zero_rows = 0;
    for (const auto& [name, st] : per_layer) zero_rows += st.sparsity * st.total_rows;
    total.sparsity = total.total_rows ? zero_rows / static_cast<double>(total.total_rows) : 0.0;
    j["total"] = {{"bits_dense", total.bits_dense}, {"bits_basis", total.bits_basis},
                  {"bits_ce", total.bits_ce},       {"bits_index", total.bits_index},
                  {"cr", total.cr},                 {"sparsity", total.sparsity},
                  {"nonzero_elems", total.nonzero_elems}, {"total_rows", total.total_rows}};
    return j.dump(2);
}

std::vector<std::pair<std::string, StorageStats>> load_stats(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("stats: ") + e.what());
    }
    std::vector<std::pair<std::string, StorageStats>> out;
    try {
        for (const auto& l : j.at("layers")) {
            StorageStats st;
            st.bits_dense = l.at("bits_dense").get<std::int64_t>();
            st.bits_basis = l.at("bits_basis").get<std::int64_t>();
            st.bits_ce = l.at("bits_ce").get<std::int64_t>();
            st.bits_index = l.at("bits_index").get<std::int64_t>();
            st.cr = l.at("cr").get<double>();
            st.sparsity = l.at("sparsity").get<double>();
            st.nonzero_elems = l.value("nonzero_elems", std::int64_t{0});
            st.total_rows = l.value("total_rows", std::int64_t{0});
            out.emplace_back(l.at("layer").get<std::string>(), st);
        }
    } catch (const json::exception& e) {
        throw parse_error(std::string("stats: ") + e.what());
    }
    return out;
}

}  // namespace sx
