// Drives the built CLI binary; the path arrives as argv[1].

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sx/io.hpp"
#include "sx/workload.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
    if (!ok) ++failures;
}

int run(const std::string& cmd) {
    const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string strip_timestamps(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.find("\"timestamp\"") == std::string::npos) out << line << "\n";
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: sx_cli_tests <sx binary>\n");
        return 2;
    }
    const std::string sx = argv[1];
    const fs::path work = fs::temp_directory_path() / "sx_cli_tests";
    fs::remove_all(work);
    fs::create_directories(work);

    check(run(sx + " presets list") == 0, "presets list exits 0");
    check(run(sx + " presets show vgg19_c10") == 0, "presets show workload");
    check(run(sx + " presets show 65nm") == 0, "presets show hardware");
    check(run(sx + " presets show nothere") == 1, "unknown preset exits 1");

    check(run(sx + " model --preset alexnet --hw /no/such/file.json --out " +
              (work / "m0").string()) == 2,
          "missing hardware file exits 2");

    // Tiny workload + weights for the pipeline.
    const std::string wl = (work / "wl.json").string();
    sx::atomic_write(wl, R"({"name":"tiny","layers":[
        {"name":"c1","kind":"conv","M":2,"C":2,"R":3,"S":3,"E":4,"F":4,"U":1},
        {"name":"f1","kind":"fc","M":3,"C":6}]})");
    const std::string bad_wl = (work / "bad.json").string();
    sx::atomic_write(bad_wl, R"({"name":"bad","layers":[{"name":"x","kind":"fc","M":0,"C":6}]})");
    check(run(sx + " model --workload " + bad_wl + " --hw-preset 65nm --out " +
              (work / "m1").string()) == 1,
          "invalid workload exits 1");

    fs::create_directories(work / "weights");
    {
        sx::Tensor t1;
        t1.dims = {2, 2, 3, 3};
        for (int i = 0; i < 36; ++i) t1.values.push_back(0.1f * static_cast<float>(i % 7) - 0.3f);
        sx::write_setn((work / "weights" / "c1.setn").string(), t1);
        sx::Tensor t2;
        t2.dims = {3, 6};
        for (int i = 0; i < 18; ++i) t2.values.push_back(0.05f * static_cast<float>(i) - 0.4f);
        sx::write_setn((work / "weights" / "f1.setn").string(), t2);
    }

    const std::string out1 = (work / "run1").string();
    const std::string out2 = (work / "run2").string();
    const std::string compress_cmd = " compress --weights " + (work / "weights").string() +
                                     " --workload " + wl + " --theta-v 0.1 --seed 7 --out ";
    const bool compressed = run(sx + compress_cmd + out1) == 0;
    check(compressed, "compress exits 0");
    if (!compressed) {
        std::printf("aborting: compress failed\n");
        return 1;
    }
    check(fs::exists(fs::path(out1) / "stats.json"), "compress writes stats.json");
    check(fs::exists(fs::path(out1) / "c1.seform.json"), "compress writes per-layer form");

    const std::string model_cmd = " model --workload " + wl +
                                  " --hw-preset 65nm --dataflow output_stationary --se-stats " +
                                  out1 + "/stats.json --out ";
    check(run(sx + model_cmd + (work / "mod1").string()) == 0, "model with SE stats exits 0");
    check(fs::exists(work / "mod1" / "model.csv"), "model writes CSV");

    // Determinism: identical runs modulo the manifest timestamp.
    check(run(sx + compress_cmd + out2) == 0, "second compress exits 0");
    const std::string s1 = strip_timestamps(sx::read_file(out1 + "/stats.json"));
    const std::string s2 = strip_timestamps(sx::read_file(out2 + "/stats.json"));
    check(s1 == s2, "compress outputs deterministic modulo timestamp");

    check(run(sx + model_cmd + (work / "mod2").string()) == 0, "second model exits 0");
    check(strip_timestamps(sx::read_file((work / "mod1" / "model.json").string())) ==
              strip_timestamps(sx::read_file((work / "mod2" / "model.json").string())),
          "model outputs deterministic modulo timestamp");

    // Power-of-two weights round-trip through compress exactly.
    {
        sx::Tensor t;
        t.dims = {2, 6};
        for (int i = 0; i < 12; ++i)
            t.values.push_back((i % 2 ? -1.0f : 1.0f) * std::ldexp(1.0f, -(i % 4)));
        fs::create_directories(work / "pw");
        sx::write_setn((work / "pw" / "p1.setn").string(), t);
        const std::string pwl = (work / "pwl.json").string();
        sx::atomic_write(pwl, R"({"name":"p","layers":[{"name":"p1","kind":"fc","M":2,"C":6}]})");
        const std::string pout = (work / "pcmp").string();
        check(run(sx + " compress --weights " + (work / "pw").string() + " --workload " + pwl +
                  " --out " + pout) == 0,
              "compress power-of-two weights exits 0");
        json st = json::parse(sx::read_file(pout + "/stats.json"));
        check(st["layers"][0]["rel_error"].get<double>() <= 1e-6,
              "structured weights reconstruct below 1e-6");
    }

    // model accepts a dataflow encoding file.
    {
        const std::string one = (work / "one.json").string();
        sx::atomic_write(one, R"({"name":"one","layers":[
            {"name":"c1","kind":"conv","M":2,"C":2,"R":3,"S":3,"E":4,"F":4,"U":1}]})");
        const std::string df = (work / "df.txt").string();
        sx::atomic_write(df,
                         "style=output_stationary;DRAM:M=2;GB:M=1,E=1,F=1;NoC:E*=4,F*=4;"
                         "RF:C=2,R=3,S=3;refresh=GB.I@1,GB.O@4,GB.W@2,RF.I@6,RF.O@9,RF.W@6");
        check(run(sx + " model --workload " + one + " --hw-preset 65nm --dataflow " + df +
                  " --out " + (work / "mdf").string()) == 0,
              "model with explicit dataflow encoding exits 0");
        check(fs::exists(work / "mdf" / "model_summary.csv"), "model writes summary CSV");
    }

    // convert: csv -> setn -> csv fixpoint.
    const std::string csv1 = (work / "t.csv").string();
    sx::write_tensor_csv(csv1, sx::read_setn((work / "weights" / "f1.setn").string()));
    check(run(sx + " convert --in " + csv1 + " --out-file " + (work / "t.setn").string()) == 0,
          "convert csv->setn exits 0");
    check(run(sx + " convert --in " + (work / "t.setn").string() + " --out-file " +
              (work / "t2.csv").string()) == 0,
          "convert setn->csv exits 0");
    check(sx::read_file(csv1) == sx::read_file((work / "t2.csv").string()),
          "convert round trip is a fixpoint");

    // dse on the tiny workload: exhaustive == pruned modulo manifests.
    const std::string dse1 = (work / "dse_ex").string();
    const std::string dse2 = (work / "dse_pr").string();
    check(run(sx + " dse --workload " + wl +
              " --hw-preset 65nm --objective edp --mode exhaustive --out " + dse1) == 0,
          "dse exhaustive exits 0");
    check(run(sx + " dse --workload " + wl +
              " --hw-preset 65nm --objective edp --mode pruned --out " + dse2) == 0,
          "dse pruned exits 0");
    json ja = json::parse(sx::read_file(dse1 + "/dse.json"));
    json jb = json::parse(sx::read_file(dse2 + "/dse.json"));
    ja.erase("manifest");
    jb.erase("manifest");
    check(ja.dump() == jb.dump(), "dse exhaustive == pruned output");

    check(run(sx + " dse --workload " + wl +
              " --hw-preset 65nm --objective energy --l-max 1 --out " +
              (work / "dse_inf").string()) == 1,
          "infeasible dse exits 1");

    check(run(sx + " dse --workload " + wl +
              " --hw-preset 65nm --objective latency --styles rs,nlr --per-layer --th-min 0.0001"
              " --out " + (work / "dse_sty").string()) == 0,
          "dse with style subset and per-layer constraints exits 0");

    // Reports re-parse under their schemas.
    {
        json rep = json::parse(sx::read_file((work / "mod1" / "c1.report.json").string()));
        check(rep.contains("access") && rep.contains("energy_pj") && rep["schema_version"] == 1,
              "layer report re-parses with schema fields");
        json best = json::parse(sx::read_file((work / "dse_pr" / "c1.best.report.json").string()));
        check(best["layer"] == "c1", "dse best report re-parses");
    }

    check(run(sx + " compress --weights /no/such/dir --workload " + wl + " --out " +
              (work / "cmp_missing").string()) == 2,
          "compress with missing weights exits 2");

    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
