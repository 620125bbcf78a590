#include "footlab/image.h"

#include "footlab/error.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace footlab {

namespace {

void check_dims(int width, int height, std::size_t n, const char* what)
{
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(what) + " dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    }
    if (n != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " buffer size does not match dimensions");
    }
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels))
{
    check_dims(width_, height_, pixels_.size(), "image");
}

GrayImage GrayImage::filled(int width, int height, std::uint8_t value)
{
    if (width < 1 || height < 1) {
        check_dims(width, height, 0, "image");
    }
    return GrayImage(width, height,
                     std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, value));
}

GrayImage GrayImage::rows(int first, int last) const
{
    if (first < 0 || last > height_ || first >= last) {
        throw Error(ErrorCode::InvalidArgument, "row range [" + std::to_string(first) + ", " +
                                                    std::to_string(last) + ") outside image of height " +
                                                    std::to_string(height_));
    }
    auto begin = pixels_.begin() + static_cast<std::ptrdiff_t>(first) * width_;
    auto end = pixels_.begin() + static_cast<std::ptrdiff_t>(last) * width_;
    return GrayImage(width_, last - first, std::vector<std::uint8_t>(begin, end));
}

Mask::Mask(int width, int height, std::vector<std::uint8_t> accepted)
    : width_(width), height_(height), accepted_(std::move(accepted)), count_(0)
{
    check_dims(width_, height_, accepted_.size(), "mask");
    for (auto& v : accepted_) {
        v = v != 0 ? 1 : 0;
        count_ += v;
    }
}

Mask Mask::empty(int width, int height)
{
    if (width < 1 || height < 1) {
        check_dims(width, height, 0, "mask");
    }
    return Mask(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0));
}

Histogram Histogram::from_counts(const std::array<std::uint64_t, 256>& counts)
{
    Histogram h;
    h.bins = counts;
    h.total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    return h;
}

Histogram histogram(const GrayImage& img)
{
    Histogram h;
    for (auto v : img.pixels()) {
        ++h.bins[v];
    }
    h.total = img.size();
    return h;
}

namespace {

ViewPair make_pair(const GrayImage& img, int band_start, int band_rows, int split_row)
{
    const int band_end = band_start + band_rows;
    if (band_start < 1 || band_end > img.height() - 1) {
        throw Error(ErrorCode::InvalidArgument,
                    "split leaves an empty view (band rows " + std::to_string(band_start) + ".." +
                        std::to_string(band_end) + " of " + std::to_string(img.height()) + ")");
    }
    return ViewPair{img.rows(0, band_start), img.rows(band_end, img.height()), split_row, band_start, band_rows};
}

ViewPair split_auto(const GrayImage& img, int band_rows)
{
    if (band_rows < 1) {
        throw Error(ErrorCode::InvalidArgument, "band thickness must be at least one row");
    }
    const int h = img.height();
    std::vector<std::uint64_t> row_sum(h, 0);
    for (int y = 0; y < h; ++y) {
        for (auto v : img.row(y)) {
            row_sum[y] += v;
        }
    }

    double mean = 0.0;
    for (auto s : row_sum) {
        mean += static_cast<double>(s) / img.width();
    }
    mean /= h;
    double var = 0.0;
    for (auto s : row_sum) {
        const double d = static_cast<double>(s) / img.width() - mean;
        var += d * d;
    }
    const double limit = mean + 2.0 * std::sqrt(var / h);

    // The band must leave at least one row on either side.
    int best_start = -1;
    std::uint64_t best_sum = 0;
    for (int start = 1; start + band_rows <= h - 1; ++start) {
        std::uint64_t s = 0;
        for (int k = 0; k < band_rows; ++k) {
            s += row_sum[start + k];
        }
        if (best_start < 0 || s > best_sum) {
            best_start = start;
            best_sum = s;
        }
    }
    if (best_start < 0) {
        throw Error(ErrorCode::BandNotFound, "image too short for a separator band");
    }
    const double band_mean = static_cast<double>(best_sum) / (static_cast<double>(band_rows) * img.width());
    if (!(band_mean > limit)) {
        throw Error(ErrorCode::BandNotFound, "brightest row band mean " + std::to_string(band_mean) +
                                                 " does not exceed " + std::to_string(limit));
    }
    return make_pair(img, best_start, band_rows, best_start + band_rows / 2);
}

}  // namespace

ViewPair split_views(const GrayImage& img, const SplitMode& mode)
{
    if (const auto* fixed = std::get_if<FixedSplit>(&mode)) {
        if (fixed->band_rows < 0) {
            throw Error(ErrorCode::InvalidArgument, "band thickness must be non-negative");
        }
        return make_pair(img, fixed->row, fixed->band_rows, fixed->row);
    }
    return split_auto(img, std::get<AutoSplit>(mode).band_rows);
}

}  // namespace footlab
