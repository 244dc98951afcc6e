#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sx/dse.hpp"
#include "sx/io.hpp"
#include "sx/perfmodel.hpp"
#include "sx/presets.hpp"
#include "sx/sxform.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sx;

namespace {

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Common {
    std::string out_dir = "out";
    std::uint64_t seed = 0;
};

RunManifest make_manifest(const std::string& command, const Common& common,
                          const std::vector<std::string>& input_paths,
                          const json& params) {
    RunManifest m;
    m.command = command;
    m.seed = common.seed;
    m.params_json = params.dump();
    m.timestamp = now_iso8601();
    for (const auto& p : input_paths)
        if (!p.empty() && fs::exists(p)) m.inputs.emplace_back(p, fnv1a_hex(read_file(p)));
    return m;
}

void write_with_manifest(const std::string& path, const std::string& payload_json,
                         const RunManifest& m) {
    json j = json::parse(payload_json);
    j["manifest"] = json::parse(manifest_json(m));
    atomic_write(path, j.dump(2) + "\n");
}

Workload resolve_workload(const std::string& file, const std::string& preset_name) {
    if (!preset_name.empty()) return workload_preset(preset_name);
    if (file.empty()) throw config_error("no workload given (use --workload or --preset)");
    return load_workload_file(file);
}

HardwareConfig resolve_hardware(const std::string& file, const std::string& preset_name) {
    if (!preset_name.empty()) return hardware_preset(preset_name);
    if (file.empty()) throw config_error("no hardware config given (use --hw or --hw-preset)");
    return load_hardware_file(file);
}

bool tensor_matches_layer(const Tensor& t, const LayerSpec& l) {
    const auto& d = t.dims;
    auto eq = [](std::uint32_t a, std::int64_t b) { return static_cast<std::int64_t>(a) == b; };
    if (l.kind == LayerKind::fc)
        return d.size() == 2 && eq(d[0], l.M) && eq(d[1], l.C);
    if (l.kind == LayerKind::dwconv)
        return (d.size() == 3 && eq(d[0], l.M) && eq(d[1], l.R) && eq(d[2], l.S)) ||
               (d.size() == 4 && eq(d[0], l.M) && eq(d[1], 1) && eq(d[2], l.R) && eq(d[3], l.S));
    return (d.size() == 4 && eq(d[0], l.M) && eq(d[1], l.C) && eq(d[2], l.R) && eq(d[3], l.S)) ||
           (l.R == 1 && l.S == 1 && d.size() == 2 && eq(d[0], l.M) && eq(d[1], l.C));
}

Tensor layer_tensor(const std::string& weights_path, const Workload& w, const LayerSpec& l) {
    fs::path p(weights_path);
    if (!fs::exists(p)) throw io_error("cannot open '" + weights_path + "'");
    if (fs::is_directory(p)) p /= l.name + ".setn";
    else if (w.layers.size() > 1)
        throw config_error("multi-layer workload needs a weights directory of <layer>.setn files");
    Tensor t = read_setn(p.string());
    if (!tensor_matches_layer(t, l))
        throw validation_error("weights '" + p.string() + "' do not match layer '" + l.name + "'");
    return t;
}

// ------------------------------------------------------------- compress

int cmd_compress(const std::string& weights, const std::string& wl_file,
                 const std::string& wl_preset, const SEParams& params,
                 const std::string& scores_file, int bits_ref, int bits_ce, int bits_basis,
                 double theta_c, const Common& common) {
    Workload w = resolve_workload(wl_file, wl_preset);
    fs::create_directories(common.out_dir);

    std::map<std::string, std::vector<double>> scores;
    if (!scores_file.empty()) {
        json sj = json::parse(read_file(scores_file));
        for (auto& [k, v] : sj.items()) scores[k] = v.get<std::vector<double>>();
    }

    json params_j = {{"r", params.r},       {"n_p", params.n_p},
                     {"theta_v", params.theta_v}, {"theta_c", theta_c},
                     {"tol", params.tol},   {"max_iter", params.max_iter},
                     {"slice_rows", params.slice_rows}, {"bits_ref", bits_ref},
                     {"bits_ce", bits_ce},  {"bits_basis", bits_basis}};
    RunManifest manifest =
        make_manifest("compress", common, {weights, wl_file, scores_file}, params_j);

    std::vector<std::pair<std::string, StorageStats>> all_stats;
    std::vector<double> layer_errors;
    std::printf("%-12s %10s %8s %8s %12s %12s\n", "layer", "cr", "spar", "slices", "se_bits",
                "rel_error");
    for (const auto& layer : w.layers) {
        Tensor t = layer_tensor(weights, w, layer);
        ReshapedLayer shape = reshape_layer(t.values, layer, params);
        const auto score_it = scores.find(layer.name);
        const std::vector<double> layer_scores =
            score_it == scores.end() ? std::vector<double>{} : score_it->second;
        const std::vector<bool> mask =
            sparsify_channel(layer_scores,
                             layer.kind == LayerKind::dwconv ? 1 : layer.C, theta_c);

        std::vector<SEForm> forms;
        double err2 = 0, ref2 = 0;
        json slices = json::array();
        for (std::size_t i = 0; i < shape.mats.size(); ++i) {
            SEForm f = decompose(shape.mats[i], params, mask, shape.placements[i],
                                 shape.rows_per_channel);
            const Matrix recon = reconstruct(f);
            err2 += std::pow(frob_norm(shape.mats[i] - recon), 2);
            ref2 += std::pow(frob_norm(shape.mats[i]), 2);
            slices.push_back({{"placement",
                               {{"unit", shape.placements[i].unit},
                                {"row_begin", shape.placements[i].row_begin},
                                {"rows", shape.placements[i].rows},
                                {"pad_cells", shape.placements[i].pad_cells}}},
                              {"form", json::parse(serialize_seform(f))}});
            forms.push_back(std::move(f));
        }
        StorageStats st = encode_stats(forms, layer, bits_ref, bits_ce, bits_basis);
        const double rel = ref2 > 0 ? std::sqrt(err2 / ref2) : 0.0;
        layer_errors.push_back(rel);
        all_stats.emplace_back(layer.name, st);

        json bundle = {{"schema_version", 1},
                       {"layer", layer.name},
                       {"basis_size", shape.basis_size},
                       {"rel_error", rel},
                       {"slices", slices}};
        write_with_manifest((fs::path(common.out_dir) / (layer.name + ".seform.json")).string(),
                            bundle.dump(), manifest);
        std::printf("%-12s %10.3f %8.3f %8zu %12lld %12.3e\n", layer.name.c_str(), st.cr,
                    st.sparsity, shape.mats.size(),
                    static_cast<long long>(st.bits_se()), rel);
    }

    json stats = json::parse(stats_json(all_stats));
    for (std::size_t i = 0; i < layer_errors.size(); ++i)
        stats["layers"][i]["rel_error"] = layer_errors[i];
    write_with_manifest((fs::path(common.out_dir) / "stats.json").string(), stats.dump(),
                        manifest);

    std::ostringstream csv;
    csv << "layer,bits_dense,bits_basis,bits_ce,bits_index,cr,sparsity,nonzero_elems,total_rows,"
           "rel_error\n";
    for (std::size_t i = 0; i < all_stats.size(); ++i) {
        const auto& [name, st] = all_stats[i];
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%lld,%lld,%lld,%lld,%.17g,%.17g,%lld,%lld,%.17g\n",
                      name.c_str(), static_cast<long long>(st.bits_dense),
                      static_cast<long long>(st.bits_basis), static_cast<long long>(st.bits_ce),
                      static_cast<long long>(st.bits_index), st.cr, st.sparsity,
                      static_cast<long long>(st.nonzero_elems),
                      static_cast<long long>(st.total_rows), layer_errors[i]);
        csv << buf;
    }
    atomic_write((fs::path(common.out_dir) / "stats.csv").string(), csv.str());
    const auto& tot = stats["total"];
    std::printf("%-12s %10.3f %8.3f %8s %12lld\n", "TOTAL", tot["cr"].get<double>(),
                tot["sparsity"].get<double>(), "-",
                static_cast<long long>(tot["bits_basis"].get<std::int64_t>() +
                                       tot["bits_ce"].get<std::int64_t>() +
                                       tot["bits_index"].get<std::int64_t>()));
    return 0;
}

// ---------------------------------------------------------------- model

int cmd_model(const std::string& wl_file, const std::string& wl_preset,
              const std::string& hw_file, const std::string& hw_preset,
              const std::string& dataflow_arg, const std::string& se_stats_file,
              double skip_fraction, const Common& common) {
    Workload w = resolve_workload(wl_file, wl_preset);
    HardwareConfig hw = resolve_hardware(hw_file, hw_preset);
    fs::create_directories(common.out_dir);

    std::optional<Style> style;
    std::optional<Dataflow> fixed;
    try {
        style = style_from_string(dataflow_arg);
    } catch (const parse_error&) {
        fixed = decode_dataflow(read_file(dataflow_arg));
    }

    std::vector<std::pair<std::string, StorageStats>> se_stats;
    if (!se_stats_file.empty()) se_stats = load_stats(read_file(se_stats_file));

    RunManifest manifest = make_manifest(
        "model", common, {wl_file, hw_file, se_stats_file},
        json{{"dataflow", dataflow_arg}, {"skip_fraction", skip_fraction}});

    std::ostringstream csv, summary;
    csv << report_csv_header() << "\n";
    summary << "layer,energy_pj,latency_cycles,edp_pj_cycles,throughput_gops,dram_bits,"
               "dram_access_ratio,energy_ratio,edp_ratio\n";
    json totals = {{"schema_version", 1}, {"layers", json::array()}};
    double e_total = 0, l_total = 0, e_dense_total = 0, l_dense_total = 0;
    bool any_se = false;
    for (const auto& layer : w.layers) {
        Dataflow df = fixed ? *fixed : preset(*style, layer, hw);
        auto vr = validate(df, layer, hw);
        if (!vr.pass()) {
            std::fprintf(stderr, "validation failed for layer '%s':\n", layer.name.c_str());
            for (const auto& v : vr.violations) std::fprintf(stderr, "  %s\n", v.what.c_str());
            return 1;
        }

        const StorageStats* stp = nullptr;
        StorageStats st;
        for (const auto& [n, s] : se_stats)
            if (n == layer.name) {
                st = s;
                stp = &st;
            }
        PerfReport rep = evaluate(df, layer, hw, stp, skip_fraction);
        write_with_manifest(
            (fs::path(common.out_dir) / (layer.name + ".report.json")).string(),
            report_json(rep), manifest);
        csv << report_csv_rows(rep);

        json lj = {{"layer", layer.name},
                   {"dataflow", rep.dataflow},
                   {"energy_pj", rep.energy.total()},
                   {"latency_cycles", rep.latency.total},
                   {"edp_pj_cycles", rep.edp},
                   {"throughput_gops", rep.throughput_gops},
                   {"dram_bits", rep.access.dram_bits_total()}};
        e_total += rep.energy.total();
        l_total += rep.latency.total;
        char row[512];
        if (stp) {
            any_se = true;
            PerfReport dense = evaluate(df, layer, hw);
            const double dram_ratio =
                dense.access.dram_bits_total() / rep.access.dram_bits_total();
            const double energy_ratio = dense.energy.total() / rep.energy.total();
            const double edp_ratio = dense.edp / rep.edp;
            lj["dense_vs_se"] = {{"dram_access_ratio", dram_ratio},
                                 {"energy_ratio", energy_ratio},
                                 {"edp_ratio", edp_ratio}};
            e_dense_total += dense.energy.total();
            l_dense_total += dense.latency.total;
            std::snprintf(row, sizeof row, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          layer.name.c_str(), rep.energy.total(), rep.latency.total, rep.edp,
                          rep.throughput_gops, rep.access.dram_bits_total(), dram_ratio,
                          energy_ratio, edp_ratio);
        } else {
            std::snprintf(row, sizeof row, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,,,\n",
                          layer.name.c_str(), rep.energy.total(), rep.latency.total, rep.edp,
                          rep.throughput_gops, rep.access.dram_bits_total());
        }
        summary << row;
        totals["layers"].push_back(lj);
    }
    totals["total"] = {{"energy_pj", e_total},
                       {"latency_cycles", l_total},
                       {"edp_pj_cycles", e_total * l_total}};
    if (any_se)
        totals["total"]["dense_vs_se"] = {
            {"energy_ratio", e_dense_total / e_total},
            {"edp_ratio", (e_dense_total * l_dense_total) / (e_total * l_total)}};
    write_with_manifest((fs::path(common.out_dir) / "model.json").string(), totals.dump(),
                        manifest);
    atomic_write((fs::path(common.out_dir) / "model.csv").string(), csv.str());
    atomic_write((fs::path(common.out_dir) / "model_summary.csv").string(), summary.str());
    std::printf("energy %.6g pJ, latency %.6g cycles, edp %.6g\n", e_total, l_total,
                e_total * l_total);
    return 0;
}

// ------------------------------------------------------------------ dse

int cmd_dse(const std::string& wl_file, const std::string& wl_preset, const std::string& hw_file,
            const std::string& hw_preset, const std::string& objective, const std::string& mode,
            std::optional<double> th_min, std::optional<double> l_max, bool per_layer,
            const std::string& styles_csv, std::int64_t max_candidates,
            const std::string& se_stats_file, double skip_fraction, const Common& common) {
    Workload w = resolve_workload(wl_file, wl_preset);
    HardwareConfig hw = resolve_hardware(hw_file, hw_preset);
    fs::create_directories(common.out_dir);

    Objective obj;
    obj.metric = metric_from_string(objective);
    obj.th_min_gops = th_min;
    obj.l_max_cycles = l_max;
    obj.per_layer_constraints = per_layer;

    DseOptions opts;
    opts.limits.max_candidates = max_candidates;
    if (!styles_csv.empty()) {
        opts.styles.clear();
        std::stringstream ss(styles_csv);
        std::string item;
        while (std::getline(ss, item, ',')) opts.styles.push_back(style_from_string(item));
    }
    std::vector<StorageStats> stats;
    if (!se_stats_file.empty()) {
        auto loaded = load_stats(read_file(se_stats_file));
        for (const auto& layer : w.layers) {
            bool found = false;
            for (const auto& [n, s] : loaded)
                if (n == layer.name) {
                    stats.push_back(s);
                    found = true;
                }
            if (!found)
                throw validation_error("SE stats missing layer '" + layer.name + "'");
        }
        opts.se_stats = &stats;
        opts.skip_fraction = skip_fraction;
    }

    const SearchMode m = mode == "exhaustive" ? SearchMode::exhaustive : SearchMode::pruned;
    RunManifest manifest = make_manifest(
        "dse", common, {wl_file, hw_file, se_stats_file},
        json{{"objective", objective}, {"mode", mode},
             {"th_min", th_min ? json(*th_min) : json()},
             {"l_max", l_max ? json(*l_max) : json()},
             {"per_layer", per_layer}});

    DseResult res = optimize(w, hw, obj, m, opts);
    write_with_manifest((fs::path(common.out_dir) / "dse.json").string(), dse_result_json(res),
                        manifest);
    std::ostringstream csv;
    csv << report_csv_header() << "\n";
    for (const auto& lr : res.layers) {
        write_with_manifest(
            (fs::path(common.out_dir) / (lr.layer + ".best.report.json")).string(),
            report_json(lr.report), manifest);
        csv << report_csv_rows(lr.report);
    }
    atomic_write((fs::path(common.out_dir) / "dse.csv").string(), csv.str());

    if (!res.feasible) {
        std::fprintf(stderr, "infeasible:\n");
        for (const auto& b : res.binding) std::fprintf(stderr, "  %s\n", b.c_str());
        return 1;
    }
    std::printf("best: energy %.6g pJ, latency %.6g cycles, edp %.6g, %lld candidates\n",
                res.total_energy_pj, res.total_latency_cycles, res.total_edp,
                static_cast<long long>(res.candidates));
    return 0;
}

// -------------------------------------------------------------- convert

int cmd_convert(const std::string& in, const std::string& out) {
    auto ends_with = [](const std::string& s, const std::string& suf) {
        return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
    };
    if (ends_with(in, ".csv") && ends_with(out, ".setn")) {
        write_setn(out, read_tensor_csv(in));
    } else if (ends_with(in, ".setn") && ends_with(out, ".csv")) {
        write_tensor_csv(out, read_setn(in));
    } else {
        throw config_error("convert: expected .csv <-> .setn");
    }
    return 0;
}

// -------------------------------------------------------------- presets

int cmd_presets(const std::string& action, const std::string& name) {
    if (action == "list") {
        std::printf("workloads:\n");
        for (const auto& n : workload_preset_names()) std::printf("  %s\n", n.c_str());
        std::printf("hardware:\n");
        for (const auto& n : hardware_preset_names()) std::printf("  %s\n", n.c_str());
        std::printf("dataflow styles:\n");
        for (Style s : {Style::row_stationary, Style::output_stationary,
                        Style::weight_stationary, Style::no_local_reuse})
            std::printf("  %s\n", to_string(s).c_str());
        return 0;
    }
    if (action == "show") {
        for (const auto& n : workload_preset_names())
            if (n == name) {
                std::printf("%s\n", serialize_workload(workload_preset(name)).c_str());
                return 0;
            }
        for (const auto& n : hardware_preset_names())
            if (n == name) {
                std::printf("%s\n", serialize_hardware(hardware_preset(name)).c_str());
                return 0;
            }
        throw config_error("unknown preset '" + name + "'");
    }
    throw config_error("presets: expected 'list' or 'show <name>'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DNN weight compression and accelerator dataflow cost modeling"};
    app.require_subcommand(1);

    Common common;
    app.add_option("--out", common.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", common.seed, "seed recorded in the run manifest");

    // compress
    auto* c = app.add_subcommand("compress", "decompose layer weights")->fallthrough();
    std::string c_weights, c_wl, c_wl_preset, c_scores;
    SEParams params;
    int bits_ref = 32, bits_ce = 4, bits_basis = 8;
    double theta_c = 0.0;
    c->add_option("--weights", c_weights, "SETN file or directory of <layer>.setn")->required();
    c->add_option("--workload", c_wl, "workload JSON file");
    c->add_option("--preset", c_wl_preset, "workload preset name");
    c->add_option("--rank", params.r, "basis size (0 = auto)");
    c->add_option("--np", params.n_p, "max exponent-set size")->capture_default_str();
    c->add_option("--theta-v", params.theta_v, "vector sparsity threshold");
    c->add_option("--theta-c", theta_c, "channel score threshold");
    c->add_option("--tol", params.tol, "convergence tolerance")->capture_default_str();
    c->add_option("--max-iter", params.max_iter, "iteration cap")->capture_default_str();
    c->add_option("--slice-rows", params.slice_rows, "max rows per slice")->capture_default_str();
    c->add_option("--scores", c_scores, "per-layer channel scores JSON");
    c->add_option("--bits-ref", bits_ref, "reference weight precision")->capture_default_str();
    c->add_option("--bits-ce", bits_ce, "coefficient precision")->capture_default_str();
    c->add_option("--bits-basis", bits_basis, "basis precision")->capture_default_str();

    // model
    auto* mo = app.add_subcommand("model", "evaluate a dataflow on a workload")->fallthrough();
    std::string m_wl, m_wl_preset, m_hw, m_hw_preset, m_df = "output_stationary", m_stats;
    double m_skip = 0.0;
    mo->add_option("--workload", m_wl, "workload JSON file");
    mo->add_option("--preset", m_wl_preset, "workload preset name");
    mo->add_option("--hw", m_hw, "hardware JSON file");
    mo->add_option("--hw-preset", m_hw_preset, "hardware preset name");
    mo->add_option("--dataflow", m_df, "style name or dataflow encoding file")
        ->capture_default_str();
    mo->add_option("--se-stats", m_stats, "stats.json from compress");
    mo->add_option("--skip-fraction", m_skip, "activation rows skipped per zero weight row");

    // dse
    auto* d = app.add_subcommand("dse", "search the dataflow space")->fallthrough();
    std::string d_wl, d_wl_preset, d_hw, d_hw_preset, d_obj = "energy", d_mode = "pruned",
                d_styles, d_stats;
    std::int64_t d_max = 1'000'000;
    double d_th_min = -1, d_l_max = -1, d_skip = 0.0;
    bool d_per_layer = false;
    d->add_option("--workload", d_wl, "workload JSON file");
    d->add_option("--preset", d_wl_preset, "workload preset name");
    d->add_option("--hw", d_hw, "hardware JSON file");
    d->add_option("--hw-preset", d_hw_preset, "hardware preset name");
    d->add_option("--objective", d_obj, "energy|latency|edp")->capture_default_str();
    d->add_option("--mode", d_mode, "exhaustive|pruned")->capture_default_str();
    d->add_option("--th-min", d_th_min, "minimum throughput, GOP/s");
    d->add_option("--l-max", d_l_max, "maximum latency, cycles");
    d->add_flag("--per-layer", d_per_layer, "enforce constraints per layer");
    d->add_option("--styles", d_styles, "comma-separated style subset");
    d->add_option("--max-candidates", d_max, "per-layer candidate cap")->capture_default_str();
    d->add_option("--se-stats", d_stats, "stats.json from compress");
    d->add_option("--skip-fraction", d_skip, "activation rows skipped per zero weight row");

    // convert
    auto* cv = app.add_subcommand("convert", "convert CSV <-> SETN weight tensors")->fallthrough();
    std::string cv_in, cv_out;
    cv->add_option("--in", cv_in, "input file")->required();
    cv->add_option("--out-file", cv_out, "output file")->required();

    // presets
    auto* pr = app.add_subcommand("presets", "list or show bundled presets")->fallthrough();
    std::string pr_action = "list", pr_name;
    pr->add_option("action", pr_action, "list | show");
    pr->add_option("name", pr_name, "preset name for 'show'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*c)
            return cmd_compress(c_weights, c_wl, c_wl_preset, params, c_scores, bits_ref, bits_ce,
                                bits_basis, theta_c, common);
        if (*mo)
            return cmd_model(m_wl, m_wl_preset, m_hw, m_hw_preset, m_df, m_stats, m_skip, common);
        if (*d)
            return cmd_dse(d_wl, d_wl_preset, d_hw, d_hw_preset, d_obj, d_mode,
                           d_th_min >= 0 ? std::optional<double>(d_th_min) : std::nullopt,
                           d_l_max >= 0 ? std::optional<double>(d_l_max) : std::nullopt,
                           d_per_layer, d_styles, d_max, d_stats, d_skip, common);
        if (*cv) return cmd_convert(cv_in, cv_out);
        if (*pr) return cmd_presets(pr_action, pr_name);
    } catch (const io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const parse_error& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const validation_error& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 1;
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const shape_error& e) {
        std::fprintf(stderr, "shape error: %s\n", e.what());
        return 1;
    } catch (const model_error& e) {
        std::fprintf(stderr, "model error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
