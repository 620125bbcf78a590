#include "footlab/app/commands.h"
#include "footlab/app/config.h"
#include "footlab/error.h"
#include "footlab/image_io.h"

#include <gtest/gtest.h>

#include <sstream>

using namespace footlab;
using namespace footlab::app;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) { return std::string(FOOTLAB_DATA_DIR) + "/fixtures/" + name; }

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no footlab::Error thrown";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Config, JsonRoundTrip)
{
    SessionConfig c;
    c.measure.background = 231;
    c.measure.delta = 40;
    c.measure.curve_fraction = 0.3;
    c.measure.bias_correction_cm = 0.4;
    c.measure.split = FixedSplit{120, 2};
    c.measure.search.lo = 10;
    c.measure.search.hi = 240;
    c.measure.search.step = 2;
    c.measure.search.polarity = soit::Polarity::BrightForeground;
    c.measure.search.noise.divisor = soit::Divisor::LiteralWidth;
    c.measure.search.denoise.max_iters = 3;
    c.classical.percentile = 0.3;
    c.classical.li = classical::LiVariant::Scan;
    c.profile_path = "rig.profile";
    c.no_plots = true;

    const json j = to_json(c);
    const SessionConfig back = config_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.measure.background, 231);
    EXPECT_EQ(back.search().step, 2);
    EXPECT_EQ(std::get<FixedSplit>(back.measure.split).row, 120);
    EXPECT_EQ(back.classical.li, classical::LiVariant::Scan);
    EXPECT_TRUE(back.no_plots);

    EXPECT_EQ(config_from_json(json::object()).measure.delta, 50);
    EXPECT_FALSE(config_from_json({{"background", "auto"}}, c).measure.background.has_value());
}

TEST(Config, OverlayKeepsBase)
{
    SessionConfig base;
    base.measure.delta = 33;
    const auto c = config_from_json({{"search", {{"step", 5}}}}, base);
    EXPECT_EQ(c.measure.delta, 33);
    EXPECT_EQ(c.search().step, 5);
    EXPECT_EQ(c.search().hi, 255);
}

TEST(Config, Rejections)
{
    EXPECT_EQ(code_of([] { config_from_json({{"background", 300}}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { config_from_json({{"delta", 0}}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { config_from_json({{"search", {{"step", 0}}}}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { config_from_json({{"bogus", 1}}); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] { config_from_json({{"delta", "many"}}); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] { search_from_json({{"polarity", "grey"}}); }), ErrorCode::SchemaError);
}

TEST(Threshold, SoitOnGoodFixture)
{
    const auto img = load_gray_file(fixture("fixture_good.png"));
    const auto truth = load_mask(read_file(fixture("fixture_good_truth.png")));
    const auto o = run_threshold(img, {});
    EXPECT_EQ(o.method, "soit");
    ASSERT_TRUE(o.best.has_value());
    EXPECT_EQ(o.curve.size(), 256u);
    EXPECT_GT(synth::iou(o.mask, truth), 0.98);
    std::ostringstream os;
    write_threshold_report(os, o);
    EXPECT_NE(os.str().find("threshold=" + std::to_string(o.threshold) + "\n"), std::string::npos);
}

TEST(Threshold, ClassicalMethods)
{
    const auto img = load_gray_file(fixture("two_spike.png"));
    ThresholdRequest req;
    req.method = "OTSU";
    const auto o = run_threshold(img, req);
    EXPECT_EQ(o.method, "Otsu");
    EXPECT_EQ(o.threshold, 50);
    EXPECT_TRUE(o.criterion.has_value());
    EXPECT_TRUE(o.curve.empty());
    EXPECT_EQ(o.mask.count(), 5000u);

    req.search.polarity = soit::Polarity::BrightForeground;
    EXPECT_EQ(run_threshold(img, req).mask.count(), 5000u);  // pixels > 50

    req.method = "kmeans";
    EXPECT_EQ(code_of([&] { run_threshold(img, req); }), ErrorCode::InvalidArgument);
}

TEST(Bench, CountsAndDeterminism)
{
    const auto methods = expand_methods({"all"});
    EXPECT_EQ(methods.size(), 16u);
    EXPECT_EQ(methods.front(), "soit");
    EXPECT_THROW(expand_methods({"nope"}), Error);

    const std::vector<synth::Tier> tiers{synth::Tier::Good, synth::Tier::Average, synth::Tier::Poor};
    const auto rows = run_bench(tiers, {"all"}, {1});
    EXPECT_EQ(rows.size(), 48u);
    std::ostringstream a, b;
    write_bench_csv(a, rows);
    write_bench_csv(b, run_bench(tiers, {"all"}, {1}));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().rfind("tier,method,seed,threshold,iou,status\n", 0), 0u);
}

TEST(Batch, KeepsOrderAndCapturesFailures)
{
    std::vector<synth::FootScene> scenes;
    for (std::uint64_t s = 1; s <= 4; ++s) scenes.push_back(synth::generate_foot(synth::random_foot_spec(s)));
    // One calibration for all: seeds share the default scale lines.
    const auto profile = scenes[0].profile;
    std::vector<std::string> inputs{"0", "1", "bad", "2", "3"};
    const auto items = run_batch(inputs, profile, {}, 3, [&](const std::string& id) {
        if (id == "bad") return load_gray_file(fixture("corrupt.png"));
        return scenes[std::stoul(id)].photo;
    });
    ASSERT_EQ(items.size(), 5u);
    for (std::size_t i = 0; i < items.size(); ++i) EXPECT_EQ(items[i].input, inputs[i]);
    EXPECT_FALSE(items[2].result.has_value());
    EXPECT_NE(items[2].error.find("DecodeError"), std::string::npos) << items[2].error;
    EXPECT_NE(items[2].error.find("load"), std::string::npos) << items[2].error;

    std::ostringstream csv;
    write_measure_csv(csv, items);
    std::string line;
    std::istringstream in(csv.str());
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 5);  // header + 4 rows

    const auto sidecar = batch_sidecar(items, false);
    EXPECT_TRUE(sidecar.is_object());
}

TEST(Calibrate, ObservationCsv)
{
    const auto obs = parse_observations_csv("view,distance_px,px_per_cm\nside,100,140\nside,300,120\n"
                                            "under,100,90\nunder,300,80\n",
                                            5.0);
    ASSERT_EQ(obs.size(), 4u);
    const auto p = calibrate(obs, "2026-10-15");
    EXPECT_DOUBLE_EQ(p.function(calib::View::Side).slope, -0.1);
    EXPECT_DOUBLE_EQ(p.function(calib::View::Side).intercept, 150.0);
    EXPECT_DOUBLE_EQ(p.function(calib::View::Under).intercept, 95.0);

    const auto cube = parse_observations_csv("view,distance_px,cube_px\nside,100,700\n", 5.0);
    EXPECT_DOUBLE_EQ(cube[0].second.px_per_cm, 140.0);

    EXPECT_EQ(code_of([] { parse_observations_csv("view,distance_px\nside,100\n", 5.0); }), ErrorCode::SchemaError);
    const auto side_only = parse_observations_csv("view,distance_px,px_per_cm\nside,1,2\n", 5.0);
    EXPECT_EQ(code_of([&] { calibrate(side_only, ""); }), ErrorCode::InsufficientData);
}
