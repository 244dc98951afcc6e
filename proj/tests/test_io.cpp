#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "sx/io.hpp"
#include "sx/sxform.hpp"

using namespace sx;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / "sx_io_tests";
    fs::create_directories(dir);
    return (dir / (std::to_string(counter++) + "_" + name)).string();
}

}  // namespace

TEST_CASE("SETN round trip preserves bits") {
    std::mt19937_64 rng(3);
    std::normal_distribution<float> dist;
    Tensor t;
    t.dims = {2, 3, 3, 3};
    t.values.resize(t.count());
    for (auto& v : t.values) v = dist(rng);
    const std::string path = temp_path("w.setn");
    write_setn(path, t);
    Tensor back = read_setn(path);
    CHECK(back.dims == t.dims);
    CHECK(back.values == t.values);
}

TEST_CASE("SETN rejects truncated and foreign files") {
    const std::string path = temp_path("bad.setn");
    atomic_write(path, "NOPE");
    CHECK_THROWS_AS(read_setn(path), io_error);
    CHECK_THROWS_AS(read_setn(temp_path("missing.setn")), io_error);
}

TEST_CASE("CSV tensor round trip") {
    Tensor t;
    t.dims = {4, 6};
    for (int i = 0; i < 24; ++i) t.values.push_back(static_cast<float>(i) * 0.25f);
    const std::string path = temp_path("w.csv");
    write_tensor_csv(path, t);
    Tensor back = read_tensor_csv(path);
    CHECK(back.dims == t.dims);
    CHECK(back.values == t.values);
}

TEST_CASE("atomic_write replaces content") {
    const std::string path = temp_path("f.txt");
    atomic_write(path, "one");
    atomic_write(path, "two");
    CHECK(read_file(path) == "two");
}

TEST_CASE("fnv1a matches the zero-offset vector") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") != fnv1a_hex("b"));
}

TEST_CASE("SEForm serialization round trip") {
    Matrix w = oracle::random_matrix(12, 3, 17);
    SEParams p;
    p.r = 3;
    p.theta_v = 0.1;
    SEForm f = decompose(w, p);
    SEForm back = load_seform(serialize_seform(f));
    CHECK(back.ce == f.ce);
    CHECK(back.basis.isApprox(f.basis, 1e-15));
    CHECK(back.p_set == f.p_set);
    CHECK(back.row_mask == f.row_mask);
    REQUIRE(back.trace.size() == f.trace.size());
    CHECK(back.trace.back().rel_error == f.trace.back().rel_error);
}

TEST_CASE("stats round trip") {
    StorageStats a;
    a.bits_dense = 1728;
    a.bits_basis = 72;
    a.bits_ce = 72;
    a.bits_index = 18;
    a.cr = 1728.0 / 162.0;
    a.sparsity = 2.0 / 3.0;
    a.total_rows = 18;
    auto parsed = load_stats(stats_json({{"l0", a}}));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].first == "l0");
    CHECK(parsed[0].second.cr == a.cr);
    CHECK(parsed[0].second.bits_index == 18);
}

TEST_CASE("manifest embeds hashes and fields") {
    RunManifest m;
    m.command = "model";
    m.inputs.emplace_back("x.json", fnv1a_hex("body"));
    m.timestamp = "2000-01-01T00:00:00Z";
    const std::string j = manifest_json(m);
    CHECK(j.find("fnv1a64") != std::string::npos);
    CHECK(j.find("model") != std::string::npos);
    CHECK(j.find("2000-01-01") != std::string::npos);
}
