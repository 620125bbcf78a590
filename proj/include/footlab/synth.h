#pragma once

#include "footlab/calibration.h"
#include "footlab/image.h"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace footlab::synth {

/// xorshift64* (Vigna 2014). State update
///     x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27;
/// output x * 0x2545F4914F6CDD1D. The seed is mixed through one splitmix64 step
/// (x += 0x9E3779B97F4A7C15; z = (x ^ x>>30) * 0xBF58476D1CE4E5B9;
/// z = (z ^ z>>27) * 0x94D049BB133111EB; z ^= z>>31) so seed 0 is valid.
class Xorshift64Star {
public:
    explicit Xorshift64Star(std::uint64_t seed);

    std::uint64_t next();
    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform();

private:
    std::uint64_t state_;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double a = 1.0;  ///< semi-axis along x
    double b = 1.0;  ///< semi-axis along y
};

struct Polygon {
    std::vector<Point> vertices;  ///< pixel coordinates, pixel (x, y) has centre (x + 0.5, y + 0.5)
};

using Shape = std::variant<Ellipse, Polygon>;

enum class Direction { LeftToRight, RightToLeft, TopToBottom, BottomToTop };

/// Linear darkening: pixel value drops by `per_px` for every pixel travelled along `direction`.
struct Illumination {
    double per_px = 0.0;
    Direction direction = Direction::LeftToRight;
};

struct SceneSpec {
    int width = 0;
    int height = 0;
    Shape shape = Ellipse{};
    int object_gray = 40;
    int background_gray = 220;
    Illumination gradient;
    double penumbra_px = 0.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;
};

struct Extents {
    int min_col = 0;
    int max_col = -1;
    int min_row = 0;
    int max_row = -1;

    int cols() const { return max_col - min_col + 1; }
    int rows() const { return max_row - min_row + 1; }
};

struct LabeledScene {
    GrayImage image;
    Mask truth;  ///< rasterised shape before penumbra, lighting and noise
    Extents extents;
};

/// Renders a scene. Pixels whose centre lies inside the shape form the truth;
/// background pixels within `penumbra_px` of the object blend linearly towards the
/// background; lighting and noise are integer fixed-point and then clamped.
/// Throws SpecInvalid, including when the object fraction is outside (0.2, 0.7).
LabeledScene generate(const SceneSpec& spec);

enum class Tier { Good, Average, Poor };

std::string_view name(Tier t);
std::optional<Tier> parse_tier(std::string_view text);

/// Fixed 480x300 ellipse scenes (object 40 on background 220, 1.5 px penumbra).
/// good: no gradient, sigma 2; average: 0.15/px, sigma 6; poor: 0.35/px, sigma 10.
SceneSpec lighting_tier(Tier tier, std::uint64_t seed);

/// Intersection over union; 1 when both masks are empty.
double iou(const Mask& a, const Mask& b);

/// Writes `<stem>.png` and `<stem>_truth.png` into `dir`.
void write_scene_pngs(const LabeledScene& scene, const std::filesystem::path& dir, const std::string& stem);

// ---------------------------------------------------------------------------
// Combined side/under foot photographs
// ---------------------------------------------------------------------------

struct FootSceneSpec {
    double length_cm = 27.0;
    double width_cm = 10.0;
    double height_cm = 7.0;  ///< instep height at half the foot length
    int distance_px = 40;    ///< gap between the background edge and the sole in the under view
    calib::ScaleFunction side_scale{-0.03, 36.0, calib::View::Side};
    calib::ScaleFunction under_scale{-0.02, 24.0, calib::View::Under};
    int background_gray = 200;
    int side_object_gray = 50;
    int under_object_gray = 60;
    int band_rows = 3;
    int band_gray = 255;
    double penumbra_px = 1.5;
    double noise_sigma = 2.0;
    std::uint64_t seed = 1;
};

struct FootTruth {
    double length_cm = 0.0;
    double width_cm = 0.0;
    double height_cm = 0.0;
    Extents side;   ///< raster extents of the side silhouette
    Extents under;  ///< raster extents of the footprint
    int distance_px = 0;
};

struct FootScene {
    GrayImage photo;
    Mask side_truth;
    Mask under_truth;
    int band_start = 0;
    calib::CalibrationProfile profile;  ///< the exact scale lines used to render
    FootTruth truth;
};

/// Side view on top (heel left, leg leaving through the top edge), a bright
/// separator band, and the footprint below it.
FootScene generate_foot(const FootSceneSpec& spec);

/// Seeded variation of foot size and distance around typical adult values.
FootSceneSpec random_foot_spec(std::uint64_t seed);

}  // namespace footlab::synth
