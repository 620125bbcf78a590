#pragma once

#include "footlab/calibration.h"
#include "footlab/image.h"
#include "footlab/soit.h"

#include <optional>
#include <utility>
#include <vector>

namespace footlab::measure {

struct CurvePoint {
    int col = 0;
    int row = 0;

    bool operator==(const CurvePoint&) const = default;
};

struct MeasureParams {
    std::optional<int> background;          ///< manual side-view brightness; nullopt = sampled
    std::optional<Rect> background_region;  ///< sampling region; default = left 5% of the side view
    int delta = 50;                         ///< "significantly darker" margin below the background
    double curve_fraction = 0.5;            ///< share of foot length traced along the upper curve
    soit::SearchConfig search;              ///< under-view threshold search
    double bias_correction_cm = 0.0;        ///< added to under-view length and width
    SplitMode split = AutoSplit{};

    void validate() const;
};

struct Span {
    int start = 0;
    int end = 0;  ///< inclusive

    int length() const { return end - start + 1; }
    bool operator==(const Span&) const = default;
};

struct UnderExtents {
    int length_px = 0;
    int width_px = 0;
    int distance_px = 0;
    Span cols;
    Span rows;
    std::vector<int> row_widths;  ///< accepted extent per mask row (0 where empty)
};

struct Diagnostics {
    int background = 0;
    int split_row = 0;
    Span side_cols;
    Span side_rows;  ///< start = top row, end = bottom row at the midpoint column
    int mid_col = 0;
    UnderExtents under;
    soit::NoiseReport under_threshold;
    double side_px_per_cm = 0.0;
    double under_px_per_cm = 0.0;
};

struct FootMeasurements {
    double length_side_cm = 0.0;
    double length_under_cm = 0.0;
    double height_cm = 0.0;
    double width_cm = 0.0;
    std::vector<CurvePoint> upper_curve;
    int distance_to_background_px = 0;
    Diagnostics diagnostics;
};

/// Mean of the region's pixels, rounded half up. Throws EmptyRegion.
int estimate_background(const GrayImage& img, const Rect& region);

/// First column with any pixel < bg - delta, and the column before the first
/// later column that is entirely >= bg - delta (last column if none).
/// Throws FootNotFound.
Span side_length(const GrayImage& img, int background, int delta);

/// Scans `col` upward from the bottom: the first dark pixel is the sole, the last
/// dark pixel before background is the top. Returned as {top, bottom}. Throws ColumnEmpty.
Span side_height(const GrayImage& img, int background, int delta, int col);

/// Upper foot curve. The top profile (first dark row per column) is median-filtered
/// over 3 columns; the curve starts at the first column whose profile drops
/// (height gradient negative) after a zero-gradient stretch, and records
/// floor(fraction * span length) raw profile points, clipped at the span end.
/// Throws CurveNotFound.
std::vector<CurvePoint> upper_curve(const GrayImage& img, int background, int delta, Span span, double fraction);

/// Column extent = length, row extent = width, first accepted row = distance to
/// the background edge at row 0. Throws EmptyMask.
UnderExtents under_measurements(const Mask& mask);

/// Full pipeline over a combined side/under photograph. Stage errors are rethrown
/// labelled with the stage name.
FootMeasurements measure_foot(const GrayImage& photo, const calib::CalibrationProfile& profile,
                              const MeasureParams& params = {});

}  // namespace footlab::measure
