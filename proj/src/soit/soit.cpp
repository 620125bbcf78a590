#include "footlab/soit.h"

#include "footlab/error.h"

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace footlab::soit {

namespace {

void validate_noise(const NoiseParams& p)
{
    if (!(p.min_frac >= 0.0 && p.min_frac < p.max_frac && p.max_frac <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "fraction bounds must satisfy 0 <= min_frac < max_frac <= 1");
    }
    if (!(std::isfinite(p.edge_weight) && p.edge_weight >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "edge_weight must be finite and non-negative");
    }
}

void validate_denoise(const DenoiseParams& p)
{
    if (p.remove_max < 0 || p.fill_min > 8 || p.remove_max >= p.fill_min) {
        throw Error(ErrorCode::InvalidArgument, "denoise requires 0 <= remove_max < fill_min <= 8");
    }
    if (p.max_iters < 0) {
        throw Error(ErrorCode::InvalidArgument, "denoise max_iters must be non-negative");
    }
}

NoiseReport make_report(std::size_t row_tr, std::size_t col_tr, std::size_t en, std::size_t nac, int width,
                        int height, const NoiseParams& params)
{
    NoiseReport r;
    r.row_transitions = row_tr;
    r.col_transitions = col_tr;
    r.edge_noise = en;
    r.nac = nac;
    const double rows_div = params.divisor == Divisor::PerAxis ? height : width;
    r.mean_row_noise = static_cast<double>(row_tr) / rows_div;
    r.mean_col_noise = static_cast<double>(col_tr) / width;
    r.z = objective(row_tr, col_tr, en, width, height, params);
    r.nac_fraction = static_cast<double>(nac) / (static_cast<double>(width) * height);
    r.feasible = r.nac_fraction > params.min_frac && r.nac_fraction < params.max_frac;
    return r;
}

}  // namespace

void SearchConfig::validate() const
{
    if (!(0 <= lo && lo <= hi && hi <= 255)) {
        throw Error(ErrorCode::InvalidArgument, "threshold bounds must satisfy 0 <= lo <= hi <= 255");
    }
    if (step < 1) {
        throw Error(ErrorCode::InvalidArgument, "step must be at least 1");
    }
    validate_noise(noise);
    validate_denoise(denoise);
}

Mask binarize(const GrayImage& img, int threshold, Polarity polarity)
{
    if (threshold < 0 || threshold > 255) {
        throw Error(ErrorCode::InvalidArgument, "threshold " + std::to_string(threshold) + " outside [0,255]");
    }
    std::vector<std::uint8_t> accepted(img.size());
    const auto px = img.pixels();
    if (polarity == Polarity::DarkForeground) {
        for (std::size_t i = 0; i < px.size(); ++i) {
            accepted[i] = px[i] <= threshold ? 1 : 0;
        }
    } else {
        for (std::size_t i = 0; i < px.size(); ++i) {
            accepted[i] = px[i] >= threshold ? 1 : 0;
        }
    }
    return Mask(img.width(), img.height(), std::move(accepted));
}

double objective(std::size_t row_transitions, std::size_t col_transitions, std::size_t edge_noise, int width,
                 int height, const NoiseParams& params)
{
    const double rows_div = params.divisor == Divisor::PerAxis ? height : width;
    const double row_term = static_cast<double>(row_transitions) / rows_div;
    const double col_term = static_cast<double>(col_transitions) / width;
    return (row_term + col_term) / 2.0 +
           params.edge_weight * (static_cast<double>(edge_noise) / static_cast<double>(width + height));
}

NoiseReport noise_score(const Mask& mask, const NoiseParams& params)
{
    validate_noise(params);
    const int w = mask.width();
    const int h = mask.height();

    std::size_t row_tr = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 1; x < w; ++x) {
            row_tr += mask.at(x, y) != mask.at(x - 1, y);
        }
    }
    std::size_t col_tr = 0;
    for (int y = 1; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            col_tr += mask.at(x, y) != mask.at(x, y - 1);
        }
    }

    std::size_t en = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if ((y == 0 || y == h - 1 || x == 0 || x == w - 1) && mask.at(x, y)) {
                ++en;
            }
        }
    }
    return make_report(row_tr, col_tr, en, mask.count(), w, h, params);
}

Mask denoise(const Mask& mask, const DenoiseParams& params)
{
    validate_denoise(params);
    const int w = mask.width();
    const int h = mask.height();
    std::vector<std::uint8_t> cur(mask.data().begin(), mask.data().end());
    std::vector<std::uint8_t> next(cur.size());

    for (int iter = 0; iter < params.max_iters; ++iter) {
        bool changed = false;
        for (int y = 0; y < h; ++y) {
            const int y0 = y > 0 ? y - 1 : y;
            const int y1 = y < h - 1 ? y + 1 : y;
            for (int x = 0; x < w; ++x) {
                const int x0 = x > 0 ? x - 1 : x;
                const int x1 = x < w - 1 ? x + 1 : x;
                const std::size_t idx = static_cast<std::size_t>(y) * w + x;
                int n = 0;
                for (int yy = y0; yy <= y1; ++yy) {
                    const std::uint8_t* row = cur.data() + static_cast<std::size_t>(yy) * w;
                    for (int xx = x0; xx <= x1; ++xx) {
                        n += row[xx];
                    }
                }
                n -= cur[idx];

                std::uint8_t v = cur[idx];
                if (v != 0 && n <= params.remove_max) {
                    v = 0;
                } else if (v == 0 && n >= params.fill_min) {
                    v = 1;
                }
                next[idx] = v;
                changed = changed || v != cur[idx];
            }
        }
        cur.swap(next);
        if (!changed) {
            break;
        }
    }
    return Mask(w, h, std::move(cur));
}

SearchResult soit_search(const GrayImage& img, const SearchConfig& cfg, const ProgressFn& progress)
{
    cfg.validate();
    const int w = img.width();
    const int h = img.height();
    const bool dark = cfg.polarity == Polarity::DarkForeground;

    // Dark foreground: pair (a, b) flips for t in [min, max). Bright: t in (min, max].
    std::array<std::int64_t, 257> row_diff{};
    std::array<std::int64_t, 257> col_diff{};
    auto add_pair = [dark](std::array<std::int64_t, 257>& diff, int a, int b) {
        if (a == b) {
            return;
        }
        const int lo = a < b ? a : b;
        const int hi = a < b ? b : a;
        if (dark) {
            ++diff[lo];
            --diff[hi];
        } else {
            ++diff[lo + 1];
            --diff[hi + 1];
        }
    };

    std::array<std::uint64_t, 256> border{};
    const int report_every = h > 64 ? h / 16 : h;
    for (int y = 0; y < h; ++y) {
        const auto row = img.row(y);
        for (int x = 1; x < w; ++x) {
            add_pair(row_diff, row[x - 1], row[x]);
        }
        if (y > 0) {
            const auto above = img.row(y - 1);
            for (int x = 0; x < w; ++x) {
                add_pair(col_diff, above[x], row[x]);
            }
        }
        if (y == 0 || y == h - 1) {
            for (int x = 0; x < w; ++x) {
                ++border[row[x]];
            }
        } else {
            ++border[row[0]];
            if (w > 1) {
                ++border[row[w - 1]];
            }
        }
        if (progress && (y + 1) % report_every == 0) {
            progress(0.9 * (y + 1) / h);
        }
    }
    const Histogram hist = histogram(img);

    // Prefix sums over thresholds 0..255.
    std::array<std::size_t, 256> row_tr{};
    std::array<std::size_t, 256> col_tr{};
    std::array<std::size_t, 256> en{};
    std::array<std::size_t, 256> nac{};
    std::int64_t run_r = 0;
    std::int64_t run_c = 0;
    for (int t = 0; t < 256; ++t) {
        run_r += row_diff[t];
        run_c += col_diff[t];
        row_tr[t] = static_cast<std::size_t>(run_r);
        col_tr[t] = static_cast<std::size_t>(run_c);
    }
    if (dark) {
        std::uint64_t b = 0;
        std::uint64_t n = 0;
        for (int t = 0; t < 256; ++t) {
            b += border[t];
            n += hist.bins[t];
            en[t] = b;
            nac[t] = n;
        }
    } else {
        std::uint64_t b = 0;
        std::uint64_t n = 0;
        for (int t = 255; t >= 0; --t) {
            b += border[t];
            n += hist.bins[t];
            en[t] = b;
            nac[t] = n;
        }
    }

    SearchResult result{NoiseReport{}, Mask::empty(w, h), {}};
    bool found = false;
    for (int t = cfg.lo; t <= cfg.hi; t += cfg.step) {
        NoiseReport r = make_report(row_tr[t], col_tr[t], en[t], nac[t], w, h, cfg.noise);
        r.threshold = t;
        if (r.feasible && (!found || r.z < result.best.z)) {
            result.best = r;
            found = true;
        }
        result.curve.push_back(r);
    }
    if (!found) {
        throw Error(ErrorCode::NoFeasibleThreshold,
                    "no threshold in [" + std::to_string(cfg.lo) + ", " + std::to_string(cfg.hi) + "] step " +
                        std::to_string(cfg.step) + " keeps the accepted fraction inside (" +
                        std::to_string(cfg.noise.min_frac) + ", " + std::to_string(cfg.noise.max_frac) + ")");
    }
    result.mask = denoise(binarize(img, result.best.threshold, cfg.polarity), cfg.denoise);
    if (progress) {
        progress(1.0);
    }
    return result;
}

void write_curve_csv(std::ostream& out, const std::vector<NoiseReport>& curve)
{
    out << "threshold,z,nac_fraction,feasible\n";
    char buf[128];
    for (const auto& r : curve) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%d\n", r.threshold, r.z, r.nac_fraction, r.feasible ? 1 : 0);
        out << buf;
    }
}

}  // namespace footlab::soit
