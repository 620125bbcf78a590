#include "footlab/synth.h"

#include "footlab/error.h"
#include "footlab/image_io.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace footlab::synth {

Xorshift64Star::Xorshift64Star(std::uint64_t seed)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    state_ = z != 0 ? z : 0x9E3779B97F4A7C15ull;
}

std::uint64_t Xorshift64Star::next()
{
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1Dull;
}

double Xorshift64Star::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

namespace {

bool inside(const Ellipse& e, double x, double y)
{
    const double u = (x - e.cx) / e.a;
    const double v = (y - e.cy) / e.b;
    return u * u + v * v <= 1.0;
}

bool inside(const Polygon& poly, double x, double y)
{
    bool in = false;
    const auto& v = poly.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i].y > y) != (v[j].y > y)) {
            const double cross = v[j].x + (y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
            if (x < cross) {
                in = !in;
            }
        }
    }
    return in;
}

template <typename Inside>
Mask rasterise(int width, int height, Inside&& test)
{
    std::vector<std::uint8_t> m(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            m[static_cast<std::size_t>(y) * width + x] = test(x + 0.5, y + 0.5) ? 1 : 0;
        }
    }
    return Mask(width, height, std::move(m));
}

Extents extents_of(const Mask& m)
{
    Extents e{m.width(), -1, m.height(), -1};
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.at(x, y)) {
                e.min_col = std::min(e.min_col, x);
                e.max_col = std::max(e.max_col, x);
                e.min_row = std::min(e.min_row, y);
                e.max_row = std::max(e.max_row, y);
            }
        }
    }
    return e;
}

// Felzenszwalb & Huttenlocher lower-envelope pass on one line of squared distances.
void edt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z)
{
    const int n = static_cast<int>(f.size());
    constexpr double inf = std::numeric_limits<double>::infinity();
    int k = 0;
    v[0] = 0;
    z[0] = -inf;
    z[1] = inf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == inf) {
            continue;
        }
        if (f[v[k]] == inf) {
            v[k] = q;
            continue;
        }
        double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) {
            ++k;
        }
        d[q] = f[v[k]] == inf ? inf : (double(q) - v[k]) * (double(q) - v[k]) + f[v[k]];
    }
}

/// Squared Euclidean distance from every pixel centre to the nearest object pixel centre.
std::vector<double> squared_distance(const Mask& m)
{
    const int w = m.width();
    const int h = m.height();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> grid(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = m.data()[i] ? 0.0 : inf;
    }
    const int n = std::max(w, h);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);
    f.resize(h);
    d.resize(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            f[y] = grid[static_cast<std::size_t>(y) * w + x];
        }
        edt_1d(f, d, v, z);
        for (int y = 0; y < h; ++y) {
            grid[static_cast<std::size_t>(y) * w + x] = d[y];
        }
    }
    f.resize(w);
    d.resize(w);
    for (int y = 0; y < h; ++y) {
        std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(y) * w, w, f.begin());
        edt_1d(f, d, v, z);
        std::copy_n(d.begin(), w, grid.begin() + static_cast<std::ptrdiff_t>(y) * w);
    }
    return grid;
}

struct Render {
    int object_gray;
    int background_gray;
    double penumbra_px;
    Illumination gradient;
    double noise_sigma;
    std::uint64_t seed;
};

std::int64_t round_shift(std::int64_t num, int bits)
{
    // Arithmetic shift is floor division for signed values in C++20.
    return (num + (std::int64_t{1} << (bits - 1))) >> bits;
}

GrayImage render(const Mask& truth, const Render& r)
{
    const int w = truth.width();
    const int h = truth.height();
    std::vector<double> dist2;
    if (r.penumbra_px > 0.0) {
        dist2 = squared_distance(truth);
    }

    const std::int64_t gradient_q8 = std::llround(r.gradient.per_px * 256.0);
    const std::int64_t sigma_q8 = std::llround(r.noise_sigma * 256.0);
    Xorshift64Star rng(r.seed);

    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            std::int64_t v = r.background_gray;
            if (truth.data()[i]) {
                v = r.object_gray;
            } else if (!dist2.empty()) {
                const double dist = std::sqrt(dist2[i]);
                if (dist < r.penumbra_px) {
                    v = std::llround(r.object_gray + (r.background_gray - r.object_gray) * (dist / r.penumbra_px));
                }
            }
            if (gradient_q8 != 0) {
                std::int64_t pos = 0;
                switch (r.gradient.direction) {
                case Direction::LeftToRight: pos = x; break;
                case Direction::RightToLeft: pos = w - 1 - x; break;
                case Direction::TopToBottom: pos = y; break;
                case Direction::BottomToTop: pos = h - 1 - y; break;
                }
                v -= round_shift(gradient_q8 * pos, 8);
            }
            if (sigma_q8 != 0) {
                // Irwin-Hall: twelve 16-bit uniforms, centred, sd ~ 65536.
                std::int64_t s = 0;
                for (int k = 0; k < 12; ++k) {
                    s += static_cast<std::int64_t>(rng.next() >> 48);
                }
                s -= 6 * 65535;
                v += round_shift(sigma_q8 * s, 24);
            }
            px[i] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(v, 0, 255));
        }
    }
    return GrayImage(w, h, std::move(px));
}

void check_gray(int v, const char* what)
{
    if (v < 0 || v > 255) {
        throw Error(ErrorCode::SpecInvalid, std::string(what) + " must lie in [0,255]");
    }
}

void check_render(double penumbra, double sigma, const Illumination& g)
{
    if (!(penumbra >= 0.0) || !std::isfinite(penumbra)) {
        throw Error(ErrorCode::SpecInvalid, "penumbra width must be finite and non-negative");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::SpecInvalid, "noise sigma must be finite and non-negative");
    }
    if (!std::isfinite(g.per_px)) {
        throw Error(ErrorCode::SpecInvalid, "illumination gradient must be finite");
    }
}

}  // namespace

LabeledScene generate(const SceneSpec& spec)
{
    if (spec.width < 1 || spec.height < 1) {
        throw Error(ErrorCode::SpecInvalid, "scene dimensions must be positive");
    }
    check_gray(spec.object_gray, "object gray");
    check_gray(spec.background_gray, "background gray");
    check_render(spec.penumbra_px, spec.noise_sigma, spec.gradient);

    Mask truth = std::visit(
        [&](const auto& shape) -> Mask {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, Ellipse>) {
                if (!(shape.a > 0.0 && shape.b > 0.0)) {
                    throw Error(ErrorCode::SpecInvalid, "ellipse semi-axes must be positive");
                }
            } else {
                if (shape.vertices.size() < 3) {
                    throw Error(ErrorCode::SpecInvalid, "polygon needs at least three vertices");
                }
            }
            return rasterise(spec.width, spec.height, [&](double x, double y) { return inside(shape, x, y); });
        },
        spec.shape);

    const double fraction = static_cast<double>(truth.count()) / static_cast<double>(truth.size());
    if (!(fraction > 0.2 && fraction < 0.7)) {
        throw Error(ErrorCode::SpecInvalid,
                    "object covers " + std::to_string(fraction) + " of the image, outside (0.2, 0.7)");
    }

    GrayImage image = render(truth, Render{spec.object_gray, spec.background_gray, spec.penumbra_px, spec.gradient,
                                           spec.noise_sigma, spec.seed});
    Extents ext = extents_of(truth);
    return LabeledScene{std::move(image), std::move(truth), ext};
}

std::string_view name(Tier t)
{
    switch (t) {
    case Tier::Good: return "good";
    case Tier::Average: return "average";
    case Tier::Poor: return "poor";
    }
    return "?";
}

std::optional<Tier> parse_tier(std::string_view text)
{
    for (Tier t : {Tier::Good, Tier::Average, Tier::Poor}) {
        if (text == name(t)) {
            return t;
        }
    }
    return std::nullopt;
}

SceneSpec lighting_tier(Tier tier, std::uint64_t seed)
{
    SceneSpec spec;
    spec.width = 480;
    spec.height = 300;
    spec.shape = Ellipse{240.0, 150.0, 165.0, 82.0};
    spec.object_gray = 40;
    spec.background_gray = 220;
    spec.penumbra_px = 1.5;
    spec.seed = seed;
    switch (tier) {
    case Tier::Good:
        spec.noise_sigma = 2.0;
        break;
    case Tier::Average:
        spec.gradient = {0.15, Direction::LeftToRight};
        spec.noise_sigma = 6.0;
        break;
    case Tier::Poor:
        spec.gradient = {0.35, Direction::LeftToRight};
        spec.noise_sigma = 10.0;
        break;
    }
    return spec;
}

double iou(const Mask& a, const Mask& b)
{
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(ErrorCode::InvalidArgument, "IoU of masks with different dimensions");
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        inter += da[i] & db[i];
        uni += da[i] | db[i];
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

void write_scene_pngs(const LabeledScene& scene, const std::filesystem::path& dir, const std::string& stem)
{
    write_file(dir / (stem + ".png"), encode_png(scene.image));
    write_file(dir / (stem + "_truth.png"), encode_png(scene.truth));
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kMargin = 80;
constexpr int kSoleMargin = 30;
constexpr int kUnderMargin = 40;

// Side silhouette in cm, x from the heel, y up from the sole.
struct SideProfile {
    double length;
    double height;  // at half length
    double heel_top;
    double leg_from;
    double leg_to;
    double toe_top;
    double instep_top;
    static constexpr double kExponent = 1.5;

    SideProfile(double l, double h)
        : length(l), height(h), heel_top(0.35 * h), leg_from(0.15 * l), leg_to(0.32 * l), toe_top(0.25 * h)
    {
        const double s_mid = (0.5 * l - leg_to) / (l - leg_to);
        instep_top = toe_top + (height - toe_top) / std::pow(1.0 - s_mid, kExponent);
    }

    /// Top of the silhouette at x; +inf inside the leg.
    double top(double x) const
    {
        if (x < leg_from) {
            return heel_top + (height - heel_top) * (x / leg_from);
        }
        if (x <= leg_to) {
            return std::numeric_limits<double>::infinity();
        }
        const double s = (x - leg_to) / (length - leg_to);
        return toe_top + (instep_top - toe_top) * std::pow(1.0 - s, kExponent);
    }
};

// Footprint half-width in cm: heel arc, straight flare to the ball, elliptic toe cap.
double half_width(double x, double length, double width)
{
    const double heel_r = 0.33 * width;
    const double ball = 0.72 * length;
    if (x < 0.0 || x > length) {
        return -1.0;
    }
    if (x < heel_r) {
        const double dx = heel_r - x;
        return std::sqrt(std::max(0.0, heel_r * heel_r - dx * dx));
    }
    if (x <= ball) {
        return heel_r + (0.5 * width - heel_r) * (x - heel_r) / (ball - heel_r);
    }
    const double u = (x - ball) / (length - ball);
    return 0.5 * width * std::sqrt(std::max(0.0, 1.0 - u * u));
}

}  // namespace

FootScene generate_foot(const FootSceneSpec& spec)
{
    if (!(spec.length_cm > 0.0 && spec.width_cm > 0.0 && spec.height_cm > 0.0)) {
        throw Error(ErrorCode::SpecInvalid, "foot dimensions must be positive");
    }
    if (spec.distance_px < 1 || spec.band_rows < 1) {
        throw Error(ErrorCode::SpecInvalid, "distance and band thickness must be at least one pixel");
    }
    check_gray(spec.background_gray, "background gray");
    check_gray(spec.side_object_gray, "side object gray");
    check_gray(spec.under_object_gray, "under object gray");
    check_gray(spec.band_gray, "band gray");
    check_render(spec.penumbra_px, spec.noise_sigma, {});

    const double d = spec.distance_px;
    const double s = spec.side_scale(d);
    const double u = spec.under_scale(d);
    if (!(s > 0.0 && u > 0.0)) {
        throw Error(ErrorCode::SpecInvalid, "scale functions must be positive at the scene distance");
    }

    const int width = static_cast<int>(std::ceil(std::max(spec.length_cm * s, spec.length_cm * u))) + 2 * kMargin;
    const SideProfile profile(spec.length_cm, spec.height_cm);
    const int side_h = static_cast<int>(std::ceil(1.6 * spec.height_cm * s)) + kSoleMargin;
    const double sole = side_h - kSoleMargin;  // pixel-boundary row of the sole
    const int under_h = spec.distance_px + static_cast<int>(std::ceil(spec.width_cm * u)) + kUnderMargin;

    Mask side_truth = rasterise(width, side_h, [&](double x, double y) {
        const double xc = (x - kMargin) / s;
        const double yc = (sole - y) / s;
        return xc >= 0.0 && xc <= spec.length_cm && yc >= 0.0 && yc <= profile.top(xc);
    });
    Mask under_truth = rasterise(width, under_h, [&](double x, double y) {
        const double xc = (x - kMargin) / u;
        const double yc = (y - d) / u - 0.5 * spec.width_cm;
        const double hw = half_width(xc, spec.length_cm, spec.width_cm);
        return hw >= 0.0 && std::abs(yc) <= hw;
    });

    Xorshift64Star seeds(spec.seed);
    const GrayImage side = render(side_truth, Render{spec.side_object_gray, spec.background_gray, spec.penumbra_px,
                                                     {}, spec.noise_sigma, seeds.next()});
    const GrayImage under = render(under_truth, Render{spec.under_object_gray, spec.background_gray,
                                                       spec.penumbra_px, {}, spec.noise_sigma, seeds.next()});

    std::vector<std::uint8_t> px;
    px.reserve(static_cast<std::size_t>(width) * (side_h + spec.band_rows + under_h));
    px.insert(px.end(), side.pixels().begin(), side.pixels().end());
    px.insert(px.end(), static_cast<std::size_t>(width) * spec.band_rows, static_cast<std::uint8_t>(spec.band_gray));
    px.insert(px.end(), under.pixels().begin(), under.pixels().end());

    calib::CalibrationProfile cal;
    cal.fit_date = "synthetic";
    auto exact = [](const calib::ScaleFunction& f) {
        return calib::ViewCalibration{f, {{0.0, f(0.0)}, {100.0, f(100.0)}}};
    };
    cal.side = exact(spec.side_scale);
    cal.under = exact(spec.under_scale);

    FootTruth truth;
    truth.length_cm = spec.length_cm;
    truth.width_cm = spec.width_cm;
    truth.height_cm = profile.top(0.5 * spec.length_cm);
    truth.side = extents_of(side_truth);
    truth.under = extents_of(under_truth);
    truth.distance_px = spec.distance_px;

    return FootScene{GrayImage(width, side_h + spec.band_rows + under_h, std::move(px)),
                     std::move(side_truth),
                     std::move(under_truth),
                     side_h,
                     std::move(cal),
                     truth};
}

FootSceneSpec random_foot_spec(std::uint64_t seed)
{
    Xorshift64Star rng(seed);
    FootSceneSpec spec;
    spec.length_cm = 25.0 + 4.0 * rng.uniform();
    spec.width_cm = 9.0 + 2.0 * rng.uniform();
    spec.height_cm = 6.0 + 2.5 * rng.uniform();
    spec.distance_px = 20 + static_cast<int>(rng.next() % 61);
    spec.seed = rng.next();
    return spec;
}

}  // namespace footlab::synth
