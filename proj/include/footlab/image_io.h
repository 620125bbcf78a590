#pragma once

#include "footlab/image.h"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace footlab {

/// Decodes PNG or JPEG bytes to luminance.
///
/// Colour pixels are reduced with Rec. 601 weights in integer arithmetic,
/// `(299 R + 587 G + 114 B + 500) / 1000`, so the result is identical on every
/// platform. 16-bit PNG samples are rescaled with `(v * 255 + 32767) / 65535`.
/// Alpha channels are ignored. Throws DecodeError or UnsupportedFormat.
GrayImage load_gray(std::span<const std::uint8_t> bytes);

GrayImage load_gray_file(const std::filesystem::path& path);

/// Rec. 601 luminance of one 8-bit RGB triple.
constexpr std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept
{
    return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

std::vector<std::uint8_t> encode_png(const GrayImage& img);

/// Single-channel PNG, 0 = not accepted, 255 = accepted.
std::vector<std::uint8_t> encode_png(const Mask& mask);

/// Reads a mask PNG back: any pixel >= 128 is accepted.
Mask load_mask(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace footlab
