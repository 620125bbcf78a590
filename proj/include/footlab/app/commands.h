#pragma once

#include "footlab/app/config.h"
#include "footlab/calibration.h"
#include "footlab/image.h"
#include "footlab/measure.h"
#include "footlab/soit.h"
#include "footlab/stats.h"
#include "footlab/synth.h"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace footlab::app {

/// "soit" or any classical method name (case-insensitive).
struct ThresholdRequest {
    std::string method = "soit";
    soit::SearchConfig search;
    classical::MethodParams classical;
};

struct ThresholdOutcome {
    std::string method;  ///< canonical spelling
    int threshold = 0;
    Mask mask;
    std::optional<soit::NoiseReport> best;       ///< SOIT only
    std::vector<soit::NoiseReport> curve;        ///< SOIT only
    std::optional<double> criterion;             ///< scan methods only
    soit::NoiseReport score;                     ///< objective of the returned mask, any method
};

/// The single thresholding path behind the CLI and the service.
/// Classical thresholds binarize with the request polarity and no denoising.
ThresholdOutcome run_threshold(const GrayImage& img, const ThresholdRequest& req,
                               const soit::ProgressFn& progress = {});

/// key=value lines: method, threshold, z, nac_fraction, feasible, criterion.
void write_threshold_report(std::ostream& out, const ThresholdOutcome& o);

struct BenchRow {
    synth::Tier tier;
    std::string method;
    std::uint64_t seed;
    int threshold = -1;  ///< -1 when the method failed
    double iou = 0.0;
    std::string status = "ok";  ///< error code name on failure
};

/// Method list entries are "soit" or classical names; "all" expands to all sixteen.
std::vector<std::string> expand_methods(const std::vector<std::string>& methods);

std::vector<BenchRow> run_bench(const std::vector<synth::Tier>& tiers, const std::vector<std::string>& methods,
                                const std::vector<std::uint64_t>& seeds, const SessionConfig& cfg = {});

/// Header `tier,method,seed,threshold,iou,status`.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

struct MeasureItem {
    std::string input;
    std::optional<measure::FootMeasurements> result;
    std::string error;  ///< stage-labelled message when result is empty
};

using ImageLoader = std::function<GrayImage(const std::string&)>;

/// Measures every input on `threads` workers; results keep input order.
/// Per-input failures are captured, never thrown.
std::vector<MeasureItem> run_batch(const std::vector<std::string>& inputs, const calib::CalibrationProfile& profile,
                                   const measure::MeasureParams& params, unsigned threads = 0,
                                   const ImageLoader& loader = {});

/// Header `image,length_side_cm,length_under_cm,height_cm,width_cm,distance_px`;
/// failed inputs are skipped.
void write_measure_csv(std::ostream& out, const std::vector<MeasureItem>& items);

/// Per-input diagnostics, curves and errors.
nlohmann::json batch_sidecar(const std::vector<MeasureItem>& items, bool with_curves);

/// Columns view, distance_px and either px_per_cm or cube_px (converted with cube_cm).
std::vector<std::pair<calib::View, calib::ScaleObservation>> parse_observations_csv(std::string_view csv,
                                                                                    double cube_cm);

/// Fits every view that has observations. Throws InsufficientData when none do.
calib::CalibrationProfile calibrate(const std::vector<std::pair<calib::View, calib::ScaleObservation>>& obs,
                                    const std::string& fit_date);

}  // namespace footlab::app
