#pragma once

#include "footlab/image.h"

#include <array>
#include <optional>
#include <string_view>

namespace footlab::classical {

/// The fifteen global thresholding baselines.
enum class MethodId {
    Huang,
    Intermodes,
    IsoData,
    Li,
    MaxEntropy,
    Mean,
    MinError,
    Minimum,
    Moments,
    Otsu,
    Percentile,
    RenyiEntropy,
    Shanbhag,
    Triangle,
    Yen,
};

inline constexpr std::array<MethodId, 15> kAllMethods = {
    MethodId::Huang,   MethodId::Intermodes, MethodId::IsoData,      MethodId::Li,       MethodId::MaxEntropy,
    MethodId::Mean,    MethodId::MinError,   MethodId::Minimum,      MethodId::Moments,  MethodId::Otsu,
    MethodId::Percentile, MethodId::RenyiEntropy, MethodId::Shanbhag, MethodId::Triangle, MethodId::Yen,
};

std::string_view name(MethodId m);

/// Case-insensitive lookup ("otsu", "MaxEntropy", ...).
std::optional<MethodId> parse_method(std::string_view text);

enum class LiVariant {
    Iterative,  ///< Li & Tam fixed-point iteration
    Scan,       ///< exhaustive minimum cross-entropy scan
};

struct MethodParams {
    double percentile = 0.5;  ///< Percentile: target cumulative fraction of the lower class
    double renyi_order = 2.0; ///< RenyiEntropy: entropy order alpha (alpha != 1)
    LiVariant li = LiVariant::Iterative;
};

/// Threshold t in [0,255]; pixels <= t form the lower class.
///
/// Criterion scans (Otsu, MaxEntropy, Yen, RenyiEntropy, Huang, Li scan, Moments,
/// Shanbhag, Triangle) keep the first optimum in ascending t. Iterative methods
/// (IsoData, MinError, Li iterative) stop when the estimate moves by <= 0.5 bin or
/// after 1000 iterations. Intermodes/Minimum smooth with a 3-bin mean until the
/// histogram has exactly two local maxima (cap 10000), else NotBimodal.
/// Throws DegenerateHistogram when a single bin is occupied (except Mean/Percentile).
int classical_threshold(const Histogram& h, MethodId m, const MethodParams& params = {});

/// Per-threshold criterion of the scan methods, NaN where undefined. Larger is
/// better for Otsu, MaxEntropy, Yen, RenyiEntropy, Triangle; smaller for Huang,
/// Li scan, Moments, Shanbhag. Exposed for plotting and diagnostics.
std::array<double, 256> criterion_curve(const Histogram& h, MethodId m, const MethodParams& params = {});

bool is_scan_method(MethodId m, const MethodParams& params = {});
bool maximises(MethodId m);

}  // namespace footlab::classical
