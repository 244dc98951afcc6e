#include <doctest.h>

#include "sx/presets.hpp"
#include "sx/workload.hpp"

using namespace sx;

TEST_CASE("layer_macs products") {
    LayerSpec fc;
    fc.name = "fc";
    fc.kind = LayerKind::fc;
    fc.M = 10;
    fc.C = 20;
    CHECK(layer_macs(fc) == 200);

    LayerSpec conv;
    conv.name = "c";
    conv.M = 2;
    conv.C = 3;
    conv.R = conv.S = 3;
    conv.E = conv.F = 4;
    CHECK(layer_macs(conv) == 864);

    LayerSpec a1;
    a1.name = "conv1";
    a1.M = 96;
    a1.C = 3;
    a1.R = a1.S = 11;
    a1.E = a1.F = 55;
    a1.U = 4;
    CHECK(layer_macs(a1) == 105'415'200);

    LayerSpec dw;
    dw.name = "dw";
    dw.kind = LayerKind::dwconv;
    dw.M = dw.C = 8;
    dw.R = dw.S = 3;
    dw.E = dw.F = 4;
    CHECK(layer_macs(dw) == 8 * 9 * 16);
}

TEST_CASE("layer_footprints") {
    LayerSpec fc;
    fc.name = "fc";
    fc.kind = LayerKind::fc;
    fc.M = 10;
    fc.C = 20;
    auto b = layer_footprints(fc);
    CHECK(b.w == 1600);
    CHECK(b.i == 160);
    CHECK(b.o == 80);

    LayerSpec single;
    single.name = "s";
    single.M = 1;
    single.C = 1;
    single.R = single.S = 3;
    single.E = single.F = 1;
    auto bs = layer_footprints(single);
    CHECK(bs.i == 3 * 3 * 8);

    LayerSpec strided;
    strided.name = "st";
    strided.M = 1;
    strided.C = 1;
    strided.R = strided.S = 3;
    strided.E = strided.F = 4;
    strided.U = 2;
    auto bt = layer_footprints(strided);
    CHECK(bt.i == 9 * 9 * 8);
}

TEST_CASE("load_workload minimal and invalid") {
    const char* doc = R"({"name":"t","layers":[{"name":"l1","kind":"fc","M":4,"C":6}]})";
    Workload w = load_workload(doc);
    CHECK(w.layers.size() == 1);
    CHECK(w.layers[0].M == 4);

    const char* bad = R"({"name":"t","layers":[{"name":"l1","kind":"fc","M":0,"C":6}]})";
    CHECK_THROWS_AS(load_workload(bad), validation_error);

    const char* fc_conv = R"({"name":"t","layers":[{"name":"l1","kind":"fc","M":4,"C":6,"R":3}]})";
    CHECK_THROWS_AS(load_workload(fc_conv), validation_error);

    CHECK_THROWS_AS(load_workload("{nope"), parse_error);

    const char* dup =
        R"({"name":"t","layers":[{"name":"a","kind":"fc","M":1,"C":1},{"name":"a","kind":"fc","M":1,"C":1}]})";
    CHECK_THROWS_AS(load_workload(dup), validation_error);
}

TEST_CASE("workload round trip") {
    Workload w = workload_preset("alexnet");
    Workload back = load_workload(serialize_workload(w));
    REQUIRE(back.layers.size() == w.layers.size());
    for (std::size_t i = 0; i < w.layers.size(); ++i) {
        CHECK(back.layers[i].name == w.layers[i].name);
        CHECK(back.layers[i].M == w.layers[i].M);
        CHECK(back.layers[i].C == w.layers[i].C);
        CHECK(back.layers[i].R == w.layers[i].R);
        CHECK(back.layers[i].E == w.layers[i].E);
        CHECK(back.layers[i].U == w.layers[i].U);
    }
}

TEST_CASE("vgg19_c10 preset has standard shapes") {
    Workload w = workload_preset("vgg19_c10");
    int convs = 0, fcs = 0;
    for (const auto& l : w.layers) {
        if (l.kind == LayerKind::conv) ++convs;
        if (l.kind == LayerKind::fc) ++fcs;
    }
    CHECK(convs == 16);
    CHECK(fcs >= 1);
    CHECK(w.layer("conv1_1").E == 32);
    CHECK(w.layer("conv5_4").M == 512);
    CHECK(w.layer("conv5_4").E == 2);
}
