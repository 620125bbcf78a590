#include "footlab/measure.h"

#include "footlab/error.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace footlab::measure {

namespace {

template <typename F>
auto stage(const char* label, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const Error& e) {
        throw e.with_stage(label);
    }
}

int dark_limit(int background, int delta)
{
    if (background < 0 || background > 255) {
        throw Error(ErrorCode::InvalidArgument, "background brightness must lie in [0,255]");
    }
    if (delta <= 0 || delta >= 255) {
        throw Error(ErrorCode::InvalidArgument, "delta must lie in (0,255)");
    }
    if (background - delta < 0) {
        throw Error(ErrorCode::InvalidArgument, "background - delta must be non-negative");
    }
    return background - delta;
}

bool column_has_dark(const GrayImage& img, int col, int limit)
{
    for (int y = 0; y < img.height(); ++y) {
        if (img.at(col, y) < limit) {
            return true;
        }
    }
    return false;
}

int median3(int a, int b, int c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

}  // namespace

void MeasureParams::validate() const
{
    if (background && (*background < 0 || *background > 255)) {
        throw Error(ErrorCode::InvalidArgument, "background brightness must lie in [0,255]");
    }
    if (delta <= 0 || delta >= 255) {
        throw Error(ErrorCode::InvalidArgument, "delta must lie in (0,255)");
    }
    if (!(curve_fraction > 0.0 && curve_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "curve_fraction must lie in (0,1]");
    }
    if (!std::isfinite(bias_correction_cm)) {
        throw Error(ErrorCode::InvalidArgument, "bias correction must be finite");
    }
    search.validate();
}

int estimate_background(const GrayImage& img, const Rect& region)
{
    if (region.width <= 0 || region.height <= 0) {
        throw Error(ErrorCode::EmptyRegion, "background region has no pixels");
    }
    if (region.x < 0 || region.y < 0 || region.x + region.width > img.width() ||
        region.y + region.height > img.height()) {
        throw Error(ErrorCode::InvalidArgument, "background region exceeds image bounds");
    }
    std::uint64_t sum = 0;
    for (int y = region.y; y < region.y + region.height; ++y) {
        for (int x = region.x; x < region.x + region.width; ++x) {
            sum += img.at(x, y);
        }
    }
    const std::uint64_t n = static_cast<std::uint64_t>(region.width) * region.height;
    return static_cast<int>((2 * sum + n) / (2 * n));
}

Span side_length(const GrayImage& img, int background, int delta)
{
    const int limit = dark_limit(background, delta);
    int start = -1;
    for (int x = 0; x < img.width(); ++x) {
        if (column_has_dark(img, x, limit)) {
            start = x;
            break;
        }
    }
    if (start < 0) {
        throw Error(ErrorCode::FootNotFound, "no column darker than " + std::to_string(limit));
    }
    int end = img.width() - 1;
    for (int x = start + 1; x < img.width(); ++x) {
        if (!column_has_dark(img, x, limit)) {
            end = x - 1;
            break;
        }
    }
    return {start, end};
}

Span side_height(const GrayImage& img, int background, int delta, int col)
{
    const int limit = dark_limit(background, delta);
    if (col < 0 || col >= img.width()) {
        throw Error(ErrorCode::InvalidArgument, "column " + std::to_string(col) + " outside image");
    }
    int y = img.height() - 1;
    while (y >= 0 && img.at(col, y) >= limit) {
        --y;
    }
    if (y < 0) {
        throw Error(ErrorCode::ColumnEmpty, "column " + std::to_string(col) + " has no dark pixel");
    }
    const int bottom = y;
    while (y - 1 >= 0 && img.at(col, y - 1) < limit) {
        --y;
    }
    return {y, bottom};
}

std::vector<CurvePoint> upper_curve(const GrayImage& img, int background, int delta, Span span, double fraction)
{
    const int limit = dark_limit(background, delta);
    if (span.start < 0 || span.end >= img.width() || span.start > span.end) {
        throw Error(ErrorCode::InvalidArgument, "curve span outside image");
    }
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "curve fraction must lie in (0,1]");
    }

    const int n = span.length();
    std::vector<int> top(n, img.height());
    for (int i = 0; i < n; ++i) {
        for (int y = 0; y < img.height(); ++y) {
            if (img.at(span.start + i, y) < limit) {
                top[i] = y;
                break;
            }
        }
    }
    std::vector<int> smooth(top);
    for (int i = 1; i + 1 < n; ++i) {
        smooth[i] = median3(top[i - 1], top[i], top[i + 1]);
    }

    // Height gradient between columns i-1 and i: positive rising, negative falling.
    int onset = -1;
    bool flat_seen = false;
    for (int i = 1; i < n; ++i) {
        const int gradient = smooth[i - 1] - smooth[i];
        if (gradient == 0) {
            flat_seen = true;
        } else if (gradient < 0 && flat_seen) {
            onset = i;
            break;
        }
    }
    if (onset < 0) {
        throw Error(ErrorCode::CurveNotFound, "top profile never falls after a flat stretch");
    }

    const int count = static_cast<int>(std::floor(fraction * n));
    std::vector<CurvePoint> curve;
    for (int i = onset; i < n && i < onset + count; ++i) {
        curve.push_back({span.start + i, top[i]});
    }
    return curve;
}

UnderExtents under_measurements(const Mask& mask)
{
    if (mask.count() == 0) {
        throw Error(ErrorCode::EmptyMask, "under-view mask has no accepted pixels");
    }
    UnderExtents ext;
    ext.cols = {mask.width(), -1};
    ext.rows = {mask.height(), -1};
    ext.row_widths.assign(mask.height(), 0);
    for (int y = 0; y < mask.height(); ++y) {
        int lo = -1;
        int hi = -1;
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                if (lo < 0) {
                    lo = x;
                }
                hi = x;
            }
        }
        if (lo < 0) {
            continue;
        }
        ext.row_widths[y] = hi - lo + 1;
        ext.cols.start = std::min(ext.cols.start, lo);
        ext.cols.end = std::max(ext.cols.end, hi);
        ext.rows.start = std::min(ext.rows.start, y);
        ext.rows.end = std::max(ext.rows.end, y);
    }
    ext.length_px = ext.cols.length();
    ext.width_px = ext.rows.length();
    ext.distance_px = ext.rows.start;
    return ext;
}

FootMeasurements measure_foot(const GrayImage& photo, const calib::CalibrationProfile& profile,
                              const MeasureParams& params)
{
    stage("params", [&] {
        params.validate();
        return 0;
    });
    const auto side_fn = stage("calibration", [&] { return profile.function(calib::View::Side); });
    const auto under_fn = stage("calibration", [&] { return profile.function(calib::View::Under); });

    const ViewPair views = stage("split", [&] { return split_views(photo, params.split); });
    const soit::SearchResult search =
        stage("under-threshold", [&] { return soit::soit_search(views.under, params.search); });

    FootMeasurements out;
    auto& diag = out.diagnostics;
    diag.split_row = views.split_row;
    diag.under_threshold = search.best;
    diag.under = stage("under-extents", [&] { return under_measurements(search.mask); });

    const GrayImage& side = views.side;
    diag.background = stage("background", [&]() -> int {
        if (params.background) {
            return *params.background;
        }
        const Rect region =
            params.background_region.value_or(Rect{0, 0, std::max(1, side.width() / 20), side.height()});
        return estimate_background(side, region);
    });

    diag.side_cols = stage("side-length", [&] { return side_length(side, diag.background, params.delta); });
    diag.mid_col = (diag.side_cols.start + diag.side_cols.end) / 2;
    diag.side_rows =
        stage("side-height", [&] { return side_height(side, diag.background, params.delta, diag.mid_col); });
    out.upper_curve = stage("upper-curve", [&] {
        return upper_curve(side, diag.background, params.delta, diag.side_cols, params.curve_fraction);
    });

    const double d = diag.under.distance_px;
    out.distance_to_background_px = diag.under.distance_px;
    stage("scale", [&] {
        out.length_side_cm = calib::px_to_cm(side_fn, d, diag.side_cols.length());
        out.height_cm = calib::px_to_cm(side_fn, d, diag.side_rows.length());
        out.length_under_cm = calib::px_to_cm(under_fn, d, diag.under.length_px) + params.bias_correction_cm;
        out.width_cm = calib::px_to_cm(under_fn, d, diag.under.width_px) + params.bias_correction_cm;
        return 0;
    });
    diag.side_px_per_cm = side_fn(d);
    diag.under_px_per_cm = under_fn(d);
    return out;
}

}  // namespace footlab::measure
