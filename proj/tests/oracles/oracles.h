#pragma once

// Straightforward re-implementations used to check the library. Nothing here
// calls the code under test beyond the plain data types.

#include "footlab/image.h"
#include "footlab/soit.h"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

struct Score {
    std::size_t row_tr = 0;
    std::size_t col_tr = 0;
    std::size_t en = 0;
    std::size_t nac = 0;
    double z = 0.0;
    bool feasible = false;
};

/// Binarize pixel by pixel and count everything directly.
Score soit_score(const footlab::GrayImage& img, int t, const footlab::soit::SearchConfig& cfg);

struct SoitBest {
    int threshold = -1;
    Score score;
    std::vector<Score> curve;
};

/// One full re-binarization per visited threshold; keeps the first strict minimum.
SoitBest soit_brute(const footlab::GrayImage& img, const footlab::soit::SearchConfig& cfg);

/// Published criteria evaluated from the raw histogram at one threshold, with
/// no shared sums; nullopt where undefined. Names follow classical::name().
std::optional<double> criterion(const std::string& method, const std::array<std::uint64_t, 256>& h, int t,
                                double renyi_order = 2.0);

/// Exhaustive arg-optimum, first in ascending t.
int criterion_argbest(const std::string& method, const std::array<std::uint64_t, 256>& h, bool maximise,
                      double renyi_order = 2.0);

/// Adaptive Simpson on the t density, P(T <= t).
double t_cdf_quadrature(double t, double df);
/// Adaptive Simpson on the F density, P(F <= f).
double f_cdf_quadrature(double f, double d1, double d2);

/// Closed-form slope/intercept from the uncentred normal equations, long double.
std::pair<double, double> normal_equations(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oracle
