#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace footlab::calib {

enum class View { Side, Under };

std::string_view name(View v);
std::optional<View> parse_view(std::string_view text);

/// One placement of the calibration cube.
struct ScaleObservation {
    double distance_px = 0.0;  ///< object-to-background gap seen in the under view
    double px_per_cm = 0.0;

    bool operator==(const ScaleObservation&) const = default;
};

/// px-per-cm as a linear function of the distance to the background.
struct ScaleFunction {
    double slope = 0.0;
    double intercept = 0.0;
    View view = View::Side;

    double operator()(double distance_px) const { return intercept + slope * distance_px; }
    bool operator==(const ScaleFunction&) const = default;
};

/// Ordinary least squares of px_per_cm on distance_px.
/// Throws InsufficientData (< 2 observations) or DegenerateFit (one distinct distance).
ScaleFunction fit_scale(std::span<const ScaleObservation> obs, View view);

/// length_px / f(distance_px); NonPositiveScale when f(distance_px) <= 0.
double px_to_cm(const ScaleFunction& f, double distance_px, double length_px);

/// Inverse of px_to_cm at fixed distance.
double cm_to_px(const ScaleFunction& f, double distance_px, double length_cm);

struct ViewCalibration {
    ScaleFunction function;
    std::vector<ScaleObservation> observations;
};

/// One fitted function per view, persisted per apparatus.
struct CalibrationProfile {
    static constexpr int kFormatVersion = 1;

    std::string fit_date;
    std::optional<ViewCalibration> side;
    std::optional<ViewCalibration> under;

    /// Throws CalibrationMissing when the view has not been calibrated.
    const ScaleFunction& function(View v) const;
};

/// Plain-text key/value profile:
///
///     # footlab calibration profile
///     format_version = 1
///     fit_date = 2026-10-15
///
///     [side]
///     slope = -0.1
///     intercept = 150
///     observations = 100:140, 300:120
///
/// Numbers are written with 17 significant digits so a reload is exact.
void write_profile(std::ostream& out, const CalibrationProfile& profile);
std::string format_profile(const CalibrationProfile& profile);

/// Throws ProfileParseError naming the offending line.
CalibrationProfile parse_profile(std::string_view text);
CalibrationProfile load_profile(const std::string& path);

}  // namespace footlab::calib
