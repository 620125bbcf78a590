#pragma once

#include "footlab/image.h"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

namespace footlab::soit {

enum class Polarity {
    DarkForeground,    ///< accepted <=> pixel <= t
    BrightForeground,  ///< accepted <=> pixel >= t
};

/// How the row and column transition sums are normalised.
enum class Divisor {
    PerAxis,       ///< sum(NR) / rows and sum(NC) / columns
    LiteralWidth,  ///< both sums divided by the image width (compatibility mode)
};

struct NoiseParams {
    double min_frac = 0.2;
    double max_frac = 0.7;
    double edge_weight = 20.0;
    Divisor divisor = Divisor::PerAxis;
};

/// Objective value and its components for one binary mask.
struct NoiseReport {
    double z = 0.0;
    double mean_row_noise = 0.0;
    double mean_col_noise = 0.0;
    std::size_t row_transitions = 0;  ///< sum of NR over all rows
    std::size_t col_transitions = 0;  ///< sum of NC over all columns
    std::size_t edge_noise = 0;       ///< accepted pixels on the outermost border
    std::size_t nac = 0;
    double nac_fraction = 0.0;
    bool feasible = false;
    int threshold = -1;  ///< filled in by the search; -1 for a bare mask

    bool operator==(const NoiseReport&) const = default;
};

struct DenoiseParams {
    int remove_max = 2;  ///< accepted pixel with <= this many accepted 8-neighbours is dropped
    int fill_min = 6;    ///< rejected pixel with >= this many accepted 8-neighbours is filled
    int max_iters = 10;
};

struct SearchConfig {
    int lo = 0;
    int hi = 255;
    int step = 1;
    NoiseParams noise;
    Polarity polarity = Polarity::DarkForeground;
    DenoiseParams denoise;

    /// Throws InvalidArgument when a bound or fraction is out of range.
    void validate() const;
};

struct SearchResult {
    NoiseReport best;
    Mask mask;                       ///< denoised binarization at best.threshold
    std::vector<NoiseReport> curve;  ///< every visited threshold, ascending
};

Mask binarize(const GrayImage& img, int threshold, Polarity polarity = Polarity::DarkForeground);

/// Objective z = (row term + column term) / 2 + edge_weight * EN / (IW + IH).
/// Transitions are counted between in-row / in-column neighbours only.
NoiseReport noise_score(const Mask& mask, const NoiseParams& params = {});

/// Same objective from pre-counted components; shared by noise_score and the search.
double objective(std::size_t row_transitions, std::size_t col_transitions, std::size_t edge_noise, int width,
                 int height, const NoiseParams& params);

Mask denoise(const Mask& mask, const DenoiseParams& params = {});

using ProgressFn = std::function<void(double)>;

/// Constrained exhaustive threshold search. Visits lo, lo+step, ... <= hi, keeps
/// the feasible threshold of minimal z (lowest threshold on ties) and denoises
/// its mask. Throws NoFeasibleThreshold when no visited threshold is feasible.
///
/// All thresholds are scored from a single pass over the image: a neighbour pair
/// (a, b) is a transition exactly for thresholds in [min(a,b), max(a,b)) (dark
/// foreground), so per-threshold transition counts come from a difference array.
SearchResult soit_search(const GrayImage& img, const SearchConfig& cfg = {}, const ProgressFn& progress = {});

/// CSV with header `threshold,z,nac_fraction,feasible`.
void write_curve_csv(std::ostream& out, const std::vector<NoiseReport>& curve);

}  // namespace footlab::soit
