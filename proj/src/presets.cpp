#include "sx/presets.hpp"

#include <algorithm>

namespace sx {

namespace {

LayerSpec conv(const std::string& name, std::int64_t m, std::int64_t c, std::int64_t k,
               std::int64_t ef, std::int64_t u = 1) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::conv;
    l.M = m;
    l.C = c;
    l.R = l.S = k;
    l.E = l.F = ef;
    l.U = u;
    return l;
}

LayerSpec fc(const std::string& name, std::int64_t m, std::int64_t c) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::fc;
    l.M = m;
    l.C = c;
    return l;
}

Workload alexnet() {
    Workload w;
    w.name = "alexnet";
    w.layers = {conv("conv1", 96, 3, 11, 55, 4), conv("conv2", 256, 96, 5, 27),
                conv("conv3", 384, 256, 3, 13),  conv("conv4", 384, 384, 3, 13),
                conv("conv5", 256, 384, 3, 13),  fc("fc6", 4096, 9216),
                fc("fc7", 4096, 4096),           fc("fc8", 1000, 4096)};
    return w;
}

Workload vgg16() {
    Workload w;
    w.name = "vgg16";
    w.layers = {conv("conv1_1", 64, 3, 3, 224),   conv("conv1_2", 64, 64, 3, 224),
                conv("conv2_1", 128, 64, 3, 112), conv("conv2_2", 128, 128, 3, 112),
                conv("conv3_1", 256, 128, 3, 56), conv("conv3_2", 256, 256, 3, 56),
                conv("conv3_3", 256, 256, 3, 56), conv("conv4_1", 512, 256, 3, 28),
                conv("conv4_2", 512, 512, 3, 28), conv("conv4_3", 512, 512, 3, 28),
                conv("conv5_1", 512, 512, 3, 14), conv("conv5_2", 512, 512, 3, 14),
                conv("conv5_3", 512, 512, 3, 14), fc("fc6", 4096, 25088),
                fc("fc7", 4096, 4096),            fc("fc8", 1000, 4096)};
    return w;
}

Workload vgg19_c10() {
    Workload w;
    w.name = "vgg19_c10";
    w.layers = {conv("conv1_1", 64, 3, 3, 32),   conv("conv1_2", 64, 64, 3, 32),
                conv("conv2_1", 128, 64, 3, 16), conv("conv2_2", 128, 128, 3, 16),
                conv("conv3_1", 256, 128, 3, 8), conv("conv3_2", 256, 256, 3, 8),
                conv("conv3_3", 256, 256, 3, 8), conv("conv3_4", 256, 256, 3, 8),
                conv("conv4_1", 512, 256, 3, 4), conv("conv4_2", 512, 512, 3, 4),
                conv("conv4_3", 512, 512, 3, 4), conv("conv4_4", 512, 512, 3, 4),
                conv("conv5_1", 512, 512, 3, 2), conv("conv5_2", 512, 512, 3, 2),
                conv("conv5_3", 512, 512, 3, 2), conv("conv5_4", 512, 512, 3, 2),
                fc("fc1", 512, 512),             fc("fc2", 512, 512),
                fc("fc3", 10, 512)};
    return w;
}

Workload resnet50_block() {
    Workload w;
    w.name = "resnet50_block";
    w.layers = {conv("res2a_1x1a", 64, 64, 1, 56), conv("res2a_3x3", 64, 64, 3, 56),
                conv("res2a_1x1b", 256, 64, 1, 56)};
    return w;
}

KindValues kv(double i, double o, double ww) {
    KindValues v;
    v.i = i;
    v.o = o;
    v.w = ww;
    return v;
}

// Synthesis-derived 65nm unit energies, pJ per 8-bit: MAC 1.60, rebuild 0.97,
// RF 1.45 (4KB bucket), SRAM 4.45 (8KB bucket), DRAM 200. The table carries
// no interconnect number; 0.05 models a short broadcast-bus hop.
UnitEnergies energies_65nm() { return {1.60, 0.97, 1.45, 0.05, 4.45, 200.0}; }

// 28nm extraction: DRAM 100, SRAM 1.36-2.45, MAC 0.143; rebuild approximated
// by three shifts and two 0.019 adds; RF at the small SRAM bucket.
UnitEnergies energies_28nm() { return {0.143, 0.057, 1.36, 0.02, 2.45, 100.0}; }

HardwareConfig hw_65nm() {
    HardwareConfig hw;
    hw.name = "65nm";
    hw.dim_m = 16;
    hw.dim_c = 16;
    hw.dim_f = 1;
    hw.n_pe = 256;
    hw.rf_bits = kv(32768, 8192, 32768);
    hw.gb_bits = kv(4194304, 32768, 2097152);
    hw.bw_gb = kv(256, 64, 512);
    hw.bw_rf = kv(64, 64, 64);
    hw.bw_dram = 64;
    hw.freq_hz = 1e9;
    hw.energy = energies_65nm();
    return hw;
}

HardwareConfig hw_28nm() {
    HardwareConfig hw = hw_65nm();
    hw.name = "28nm";
    hw.energy = energies_28nm();
    return hw;
}

HardwareConfig hw_eyeriss_like() {
    HardwareConfig hw;
    hw.name = "eyeriss_like";
    hw.dim_m = 12;
    hw.dim_c = 14;
    hw.dim_f = 1;
    hw.n_pe = 168;
    hw.rf_bits = kv(4096, 4096, 4096);  // 0.5KB register files
    hw.gb_bits = kv(294912, 294912, 294912);  // 108KB buffer split across types
    hw.bw_gb = kv(256, 64, 256);
    hw.bw_rf = kv(64, 64, 64);
    hw.bw_dram = 64;
    hw.freq_hz = 250e6;
    hw.energy = energies_65nm();
    hw.energy.rf = 0.89;  // 0.5KB bucket
    return hw;
}

HardwareConfig hw_se_like() {
    HardwareConfig hw;
    hw.name = "se_like";
    hw.dim_m = 64;
    hw.dim_c = 16;
    hw.dim_f = 8;
    hw.n_pe = 8192;
    hw.rf_bits = kv(32768, 8192, 32768);   // 2KB x 2-bank weight buffer per slice
    hw.gb_bits = kv(4194304, 32768, 2097152);  // 16KB x 32 input banks, 2KB x 2 output
    hw.bw_gb = kv(512, 64, 1024);
    hw.bw_rf = kv(128, 64, 128);
    hw.bw_dram = 128;
    hw.freq_hz = 1e9;
    hw.energy = energies_65nm();
    hw.bit_serial = true;
    hw.avg_essential_bits = 2.7;
    return hw;
}

}  // namespace

std::vector<std::string> workload_preset_names() {
    return {"alexnet", "vgg16", "vgg19_c10", "resnet50_block"};
}

std::vector<std::string> hardware_preset_names() {
    return {"65nm", "28nm", "eyeriss_like", "se_like"};
}

Workload workload_preset(const std::string& name) {
    if (name == "alexnet") return alexnet();
    if (name == "vgg16") return vgg16();
    if (name == "vgg19_c10") return vgg19_c10();
    if (name == "resnet50_block") return resnet50_block();
    throw config_error("unknown workload preset '" + name + "'");
}

HardwareConfig hardware_preset(const std::string& name) {
    if (name == "65nm") return hw_65nm();
    if (name == "28nm") return hw_28nm();
    if (name == "eyeriss_like") return hw_eyeriss_like();
    if (name == "se_like") return hw_se_like();
    throw config_error("unknown hardware preset '" + name + "'");
}

}  // namespace sx
