#include "footlab/error.h"
#include "footlab/measure.h"
#include "footlab/synth.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace footlab;
using namespace footlab::measure;

namespace {

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

std::vector<std::uint8_t> canvas(int w, int h, int v) { return std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, v); }

Mask rect_mask(int w, int h, int x0, int x1, int y0, int y1)
{
    std::vector<std::uint8_t> m(static_cast<std::size_t>(w) * h);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) m[y * w + x] = 1;
    return Mask(w, h, std::move(m));
}

}  // namespace

TEST(Background, Examples)
{
    EXPECT_EQ(estimate_background(GrayImage::filled(20, 10, 230), Rect{0, 0, 5, 10}), 230);
    auto px = canvas(4, 2, 200);
    px[4] = px[5] = px[6] = px[7] = 240;
    EXPECT_EQ(estimate_background(GrayImage(4, 2, px), Rect{0, 0, 4, 2}), 220);
    EXPECT_EQ(code_of([] { estimate_background(GrayImage::filled(4, 4, 1), Rect{0, 0, 0, 4}); }), ErrorCode::EmptyRegion);
    EXPECT_EQ(code_of([] { estimate_background(GrayImage::filled(4, 4, 1), Rect{2, 0, 4, 4}); }),
              ErrorCode::InvalidArgument);
}

TEST(Background, MatchesDirectSum)
{
    std::mt19937 rng(4);
    for (int i = 0; i < 50; ++i) {
        auto px = canvas(30, 20, 0);
        for (auto& p : px) p = static_cast<std::uint8_t>(rng() % 256);
        const GrayImage img(30, 20, px);
        const Rect r{static_cast<int>(rng() % 10), static_cast<int>(rng() % 10), 1 + static_cast<int>(rng() % 20),
                     1 + static_cast<int>(rng() % 10)};
        long sum = 0;
        for (int y = r.y; y < r.y + r.height; ++y)
            for (int x = r.x; x < r.x + r.width; ++x) sum += img.at(x, y);
        const long n = static_cast<long>(r.width) * r.height;
        EXPECT_EQ(estimate_background(img, r), static_cast<int>((2 * sum + n) / (2 * n)));
    }
}

TEST(SideLength, Examples)
{
    auto px = canvas(500, 60, 230);
    for (int y = 10; y < 50; ++y)
        for (int x = 100; x <= 399; ++x) px[y * 500 + x] = 40;
    const auto s = side_length(GrayImage(500, 60, px), 230, 50);
    EXPECT_EQ(s.start, 100);
    EXPECT_EQ(s.end, 399);
    EXPECT_EQ(s.length(), 300);

    EXPECT_EQ(code_of([] { side_length(GrayImage::filled(50, 50, 230), 230, 50); }), ErrorCode::FootNotFound);

    auto one = canvas(100, 30, 230);
    one[12 * 100 + 57] = 10;
    const auto s1 = side_length(GrayImage(100, 30, one), 230, 50);
    EXPECT_EQ(s1.start, 57);
    EXPECT_EQ(s1.end, 57);
}

TEST(SideLength, EndsAtFirstBrightColumn)
{
    auto px = canvas(60, 10, 230);
    for (int x : {5, 6, 7, 9, 10}) px[3 * 60 + x] = 20;
    const auto s = side_length(GrayImage(60, 10, px), 230, 50);
    EXPECT_EQ(s.start, 5);
    EXPECT_EQ(s.end, 7);
    // Reaches the right edge: end is the last column.
    auto edge = canvas(20, 4, 230);
    for (int x = 15; x < 20; ++x) edge[x] = 0;
    EXPECT_EQ(side_length(GrayImage(20, 4, edge), 230, 50).end, 19);
}

TEST(SideHeight, Examples)
{
    auto px = canvas(20, 600, 230);
    for (int y = 100; y <= 500; ++y) px[y * 20 + 7] = 30;
    const auto h = side_height(GrayImage(20, 600, px), 230, 50, 7);
    EXPECT_EQ(h.end, 500);
    EXPECT_EQ(h.start, 100);
    EXPECT_EQ(h.length(), 401);
    EXPECT_EQ(code_of([&] { side_height(GrayImage(20, 600, px), 230, 50, 3); }), ErrorCode::ColumnEmpty);
}

TEST(SideHeight, StopsAtFirstBrightGap)
{
    auto px = canvas(3, 100, 230);
    for (int y = 60; y <= 90; ++y) px[y * 3 + 1] = 30;
    for (int y = 10; y <= 40; ++y) px[y * 3 + 1] = 30;  // detached, above a bright gap
    const auto h = side_height(GrayImage(3, 100, px), 230, 50, 1);
    EXPECT_EQ(h.end, 90);
    EXPECT_EQ(h.start, 60);
}

TEST(UpperCurve, FlatThenDescent)
{
    // Top profile: row 10 over columns 0..29, then one row lower per column.
    const int w = 100, hgt = 120;
    auto px = canvas(w, hgt, 230);
    for (int x = 0; x < w; ++x) {
        const int top = x < 30 ? 10 : 10 + (x - 29);
        for (int y = top; y < hgt; ++y) px[y * w + x] = 30;
    }
    const GrayImage img(w, hgt, px);
    const auto curve = upper_curve(img, 230, 50, Span{0, w - 1}, 0.5);
    ASSERT_EQ(curve.size(), 50u);
    EXPECT_EQ(curve.front().col, 30);
    EXPECT_EQ(curve.front().row, 11);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        EXPECT_EQ(curve[i].col, curve[i - 1].col + 1);
    }
    // Clipped at the span end.
    const auto clipped = upper_curve(img, 230, 50, Span{0, w - 1}, 1.0);
    EXPECT_EQ(clipped.back().col, w - 1);
    EXPECT_EQ(clipped.size(), static_cast<std::size_t>(w - 30));
}

TEST(UpperCurve, FlatProfileHasNoCurve)
{
    auto px = canvas(50, 40, 230);
    for (int y = 20; y < 40; ++y)
        for (int x = 0; x < 50; ++x) px[y * 50 + x] = 30;
    EXPECT_EQ(code_of([&] { upper_curve(GrayImage(50, 40, px), 230, 50, Span{0, 49}, 0.5); }),
              ErrorCode::CurveNotFound);
}

TEST(UnderMeasurements, Examples)
{
    const auto u = under_measurements(rect_mask(300, 120, 20, 259, 10, 89));
    EXPECT_EQ(u.length_px, 240);
    EXPECT_EQ(u.width_px, 80);
    EXPECT_EQ(u.distance_px, 10);
    ASSERT_EQ(u.row_widths.size(), 120u);
    EXPECT_EQ(u.row_widths[50], 240);
    EXPECT_EQ(u.row_widths[0], 0);

    const auto one = under_measurements(rect_mask(10, 10, 3, 3, 4, 4));
    EXPECT_EQ(one.length_px, 1);
    EXPECT_EQ(one.width_px, 1);
    EXPECT_EQ(code_of([] { under_measurements(Mask::empty(5, 5)); }), ErrorCode::EmptyMask);
}

class FootScenes : public ::testing::TestWithParam<int> {};

TEST_P(FootScenes, AgreeWithGenerator)
{
    const auto spec = synth::random_foot_spec(static_cast<std::uint64_t>(GetParam()));
    const auto scene = synth::generate_foot(spec);
    const auto m = measure_foot(scene.photo, scene.profile);
    const auto& d = m.diagnostics;

    // Under view: SOIT mask extents against the rasterised footprint, +-1 px.
    EXPECT_NEAR(d.under.cols.start, scene.truth.under.min_col, 1);
    EXPECT_NEAR(d.under.cols.end, scene.truth.under.max_col, 1);
    EXPECT_NEAR(d.under.rows.start, scene.truth.under.min_row, 1);
    EXPECT_NEAR(d.under.rows.end, scene.truth.under.max_row, 1);
    EXPECT_NEAR(m.distance_to_background_px, scene.truth.distance_px, 1);

    // Side view: height at the midpoint column against the silhouette, +-1 px.
    int top = -1, bottom = -1;
    for (int y = 0; y < scene.side_truth.height(); ++y) {
        if (scene.side_truth.at(d.mid_col, y)) {
            if (top < 0) top = y;
            bottom = y;
        }
    }
    ASSERT_GE(top, 0);
    EXPECT_NEAR(d.side_rows.start, top, 1);
    EXPECT_NEAR(d.side_rows.end, bottom, 1);
    EXPECT_NEAR(d.side_cols.start, scene.truth.side.min_col, 1);
    EXPECT_NEAR(d.side_cols.end, scene.truth.side.max_col, 1);

    EXPECT_GT(m.length_side_cm, 0);
    EXPECT_GT(m.height_cm, 0);
    for (std::size_t i = 1; i < m.upper_curve.size(); ++i) EXPECT_LT(m.upper_curve[i - 1].col, m.upper_curve[i].col);
}

INSTANTIATE_TEST_SUITE_P(Seeds, FootScenes, ::testing::Range(1, 6));

TEST(MeasureFoot, BiasCorrectionIsAdditive)
{
    const auto scene = synth::generate_foot(synth::random_foot_spec(3));
    MeasureParams p;
    const auto base = measure_foot(scene.photo, scene.profile, p);
    p.bias_correction_cm = 0.4;
    const auto corrected = measure_foot(scene.photo, scene.profile, p);
    EXPECT_DOUBLE_EQ(corrected.length_under_cm, base.length_under_cm + 0.4);
    EXPECT_DOUBLE_EQ(corrected.width_cm, base.width_cm + 0.4);
    EXPECT_EQ(corrected.length_side_cm, base.length_side_cm);
    EXPECT_EQ(corrected.height_cm, base.height_cm);
}

TEST(MeasureFoot, DoublingScaleHalvesOutputs)
{
    const auto scene = synth::generate_foot(synth::random_foot_spec(4));
    const auto base = measure_foot(scene.photo, scene.profile);
    auto doubled = scene.profile;
    for (auto* v : {&doubled.side, &doubled.under}) {
        v->value().function.slope *= 2;
        v->value().function.intercept *= 2;
    }
    const auto half = measure_foot(scene.photo, doubled);
    EXPECT_DOUBLE_EQ(half.length_side_cm, base.length_side_cm / 2);
    EXPECT_DOUBLE_EQ(half.length_under_cm, base.length_under_cm / 2);
    EXPECT_DOUBLE_EQ(half.height_cm, base.height_cm / 2);
    EXPECT_DOUBLE_EQ(half.width_cm, base.width_cm / 2);
}

TEST(MeasureFoot, Deterministic)
{
    const auto scene = synth::generate_foot(synth::random_foot_spec(5));
    const auto a = measure_foot(scene.photo, scene.profile);
    const auto b = measure_foot(scene.photo, scene.profile);
    EXPECT_EQ(a.length_side_cm, b.length_side_cm);
    EXPECT_EQ(a.length_under_cm, b.length_under_cm);
    EXPECT_EQ(a.upper_curve, b.upper_curve);
}

TEST(MeasureFoot, SideScanIgnoresUnderView)
{
    // Changing the footprint must not move the side-view spans.
    auto spec = synth::random_foot_spec(6);
    const auto a = synth::generate_foot(spec);
    spec.width_cm += 1.5;
    const auto b = synth::generate_foot(spec);
    const auto ma = measure_foot(a.photo, a.profile);
    const auto mb = measure_foot(b.photo, b.profile);
    EXPECT_EQ(ma.diagnostics.side_cols, mb.diagnostics.side_cols);
}

TEST(MeasureFoot, MissingCalibration)
{
    const auto scene = synth::generate_foot(synth::random_foot_spec(2));
    auto profile = scene.profile;
    profile.under.reset();
    try {
        measure_foot(scene.photo, profile);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CalibrationMissing);
        EXPECT_EQ(e.stage(), "calibration");
    }
}

TEST(MeasureFoot, StageLabels)
{
    const auto scene = synth::generate_foot(synth::random_foot_spec(2));
    try {
        measure_foot(GrayImage::filled(300, 300, 128), scene.profile);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BandNotFound);
        EXPECT_EQ(e.stage(), "split");
    }
}

TEST(MeasureParams, Validation)
{
    MeasureParams p;
    p.delta = 0;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.curve_fraction = 1.5;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.background = 300;
    EXPECT_THROW(p.validate(), Error);
}
