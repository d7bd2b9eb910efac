/** pipeline_test.cpp - burst registration, fusion dispatch and corpus evaluation */

#include <gtest/gtest.h>

#include "hdru/eval.hpp"
#include "hdru/fusion.hpp"
#include "hdru/munet.hpp"
#include "hdru/pipeline.hpp"
#include "hdru/synth.hpp"
#include "temp_dir.hpp"

using namespace hdru;

TEST(RegisterBurst, RecoversSimulatorShifts) {
    const SimParams p;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SynthSample s = make_sample(p, seed);
        const RegisteredBurst r = register_burst(s.burst);
        for (int k = 0; k < 3; ++k) EXPECT_EQ(r.shifts[k], s.shifts[k]) << "seed " << seed << " camera " << k;
        ASSERT_EQ(r.tiles.size(), 3u);
        EXPECT_EQ(r.tiles[kReferenceCamera], center_crop(s.burst[kReferenceCamera], 256));
    }
}

TEST(RegisterBurst, RejectsWrongBurst) {
    EXPECT_THROW(register_burst({GrayImage(300, 300), GrayImage(300, 300)}), std::invalid_argument);
    EXPECT_THROW(register_burst({GrayImage(100, 100), GrayImage(100, 100), GrayImage(100, 100)}),
                 std::invalid_argument);
}

TEST(Fuse, MethodNamesRoundTrip) {
    for (auto m : {FusionMethod::mertens, FusionMethod::munet, FusionMethod::debevec, FusionMethod::single})
        EXPECT_EQ(parse_method(method_name(m)), m);
    EXPECT_THROW(parse_method("hdrnet"), std::invalid_argument);
}

TEST(Fuse, Dispatch) {
    const SynthSample s = make_sample(SimParams{}, 2);
    const Burst tiles = register_burst(s.burst).tiles;
    FuseOptions o;
    EXPECT_EQ(fuse(FusionMethod::single, tiles, o), tiles[kReferenceCamera]);
    EXPECT_EQ(fuse(FusionMethod::mertens, tiles, o), mertens_fuse(tiles, o.sigma, o.levels));
    EXPECT_THROW(fuse(FusionMethod::munet, tiles, o), std::invalid_argument);
    MuNet net = build_munet();
    init_mertens(net);
    o.net = &net;
    EXPECT_EQ(fuse(FusionMethod::munet, tiles, o), munet_fuse(net, tiles));
    for (const auto out = fuse(FusionMethod::debevec, tiles, o); float v : out.pixels()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
}

TEST(Eval, ReportIsReproducibleAndRanked) {
    TempDir dir;
    SimParams p;
    p.glare_probability = 1.0;
    generate_corpus(3, p, 5, dir.path());
    EvalOptions o;
    o.methods = {FusionMethod::mertens, FusionMethod::single};
    const EvalReport a = evaluate_corpus(dir.path(), o);
    const EvalReport b = evaluate_corpus(dir.path(), o);
    EXPECT_EQ(format_report(a), format_report(b));
    ASSERT_EQ(a.rows.size(), 6u);
    ASSERT_EQ(a.summary.size(), 2u);
    EXPECT_EQ(a.summary[0].rank, 1);
    EXPECT_GE(a.summary[0].mean_psnr, a.summary[1].mean_psnr);
    for (const auto& r : a.rows) EXPECT_TRUE(r.glare);

    o.filter = SampleFilter::clear;
    EXPECT_TRUE(evaluate_corpus(dir.path(), o).rows.empty());
    o.filter = SampleFilter::all;
    o.limit = 1;
    EXPECT_EQ(evaluate_corpus(dir.path(), o).rows.size(), 2u);
    o.methods.clear();
    EXPECT_THROW(evaluate_corpus(dir.path(), o), std::invalid_argument);
}

TEST(Eval, SummaryRanksByPsnrThenName) {
    std::vector<EvalRow> rows(4);
    rows[0].method = "b";
    rows[0].psnr = 30.0;
    rows[1].method = "b";
    rows[1].psnr = 20.0;
    rows[2].method = "a";
    rows[2].psnr = 25.0;
    rows[3].method = "c";
    rows[3].psnr = 40.0;
    const auto s = summarize(rows);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].method, "c");
    EXPECT_EQ(s[1].method, "a");
    EXPECT_EQ(s[2].method, "b");
    EXPECT_EQ(s[2].count, 2u);
    EXPECT_DOUBLE_EQ(s[2].mean_psnr, 25.0);
    EXPECT_EQ(s[2].rank, 3);
    EXPECT_THROW(parse_filter("night"), std::invalid_argument);
}
