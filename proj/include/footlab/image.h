#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace footlab {

/// Immutable 8-bit luminance raster, row-major.
class GrayImage {
public:
    GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

    static GrayImage filled(int width, int height, std::uint8_t value);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    std::uint8_t at(int x, int y) const noexcept
    {
        return pixels_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<const std::uint8_t> row(int y) const noexcept
    {
        return std::span<const std::uint8_t>(pixels_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }

    /// Rows [first, last) as a new image.
    GrayImage rows(int first, int last) const;

    bool operator==(const GrayImage&) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

/// Accepted / not-accepted raster. Stored as 0/1 bytes; any nonzero input byte reads as accepted.
class Mask {
public:
    Mask(int width, int height, std::vector<std::uint8_t> accepted);

    static Mask empty(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return accepted_.size(); }

    bool at(int x, int y) const noexcept
    {
        return accepted_[static_cast<std::size_t>(y) * width_ + x] != 0;
    }
    std::span<const std::uint8_t> data() const noexcept { return accepted_; }

    /// Number of accepted pixels (NAC).
    std::size_t count() const noexcept { return count_; }

    bool operator==(const Mask& other) const
    {
        return width_ == other.width_ && height_ == other.height_ && accepted_ == other.accepted_;
    }

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> accepted_;
    std::size_t count_;
};

struct Histogram {
    std::array<std::uint64_t, 256> bins{};
    std::uint64_t total = 0;

    static Histogram from_counts(const std::array<std::uint64_t, 256>& counts);
};

Histogram histogram(const GrayImage& img);

/// Axis-aligned pixel rectangle, half-open on the far edges.
struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

struct AutoSplit {
    int band_rows = 3;
};
struct FixedSplit {
    int row = 0;        ///< first row of the separator band
    int band_rows = 0;  ///< rows dropped between the views
};
using SplitMode = std::variant<AutoSplit, FixedSplit>;

/// Side view (above the bright separator) and under view (below it).
struct ViewPair {
    GrayImage side;
    GrayImage under;
    int split_row = 0;   ///< band centre for auto mode, band start for fixed mode
    int band_start = 0;
    int band_height = 0;
};

/// Auto mode picks the `band_rows`-thick window with the brightest mean; the window
/// mean must exceed mean + 2 sd of the per-row mean brightness, else BandNotFound.
ViewPair split_views(const GrayImage& img, const SplitMode& mode = AutoSplit{});

}  // namespace footlab
