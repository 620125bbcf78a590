#include "footlab/classical.h"

#include "footlab/error.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace footlab::classical {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kIterCap = 1000;
constexpr int kSmoothCap = 10000;

using Curve = std::array<double, 256>;

/// Prefix sums shared by the histogram methods. Counts and first moments are
/// kept as integers so that class sizes and means are exact.
struct Prefix {
    std::uint64_t total = 0;
    int first = -1;  ///< lowest occupied bin
    int last = -1;   ///< highest occupied bin
    std::array<std::uint64_t, 256> count{};  ///< sum h[i], i <= t
    std::array<std::uint64_t, 256> sum{};    ///< sum i*h[i], i <= t

    explicit Prefix(const Histogram& h)
    {
        std::uint64_t c = 0;
        std::uint64_t s = 0;
        for (int i = 0; i < 256; ++i) {
            c += h.bins[i];
            s += static_cast<std::uint64_t>(i) * h.bins[i];
            count[i] = c;
            sum[i] = s;
            if (h.bins[i] != 0) {
                if (first < 0) {
                    first = i;
                }
                last = i;
            }
        }
        total = c;
    }

    std::uint64_t n0(int t) const { return count[t]; }
    std::uint64_t n1(int t) const { return total - count[t]; }
    double mean0(int t) const { return static_cast<double>(sum[t]) / static_cast<double>(count[t]); }
    double mean1(int t) const
    {
        return static_cast<double>(sum[255] - sum[t]) / static_cast<double>(total - count[t]);
    }
    bool split(int t) const { return count[t] > 0 && count[t] < total; }
};

[[noreturn]] void degenerate(MethodId m)
{
    throw Error(ErrorCode::DegenerateHistogram,
                std::string(name(m)) + " needs at least two occupied histogram bins");
}

Curve blank()
{
    Curve c;
    c.fill(kNaN);
    return c;
}

// Otsu (1979): between-class variance w0 w1 (mu0 - mu1)^2, maximised.
Curve otsu_curve(const Prefix& p)
{
    Curve c = blank();
    const double n = static_cast<double>(p.total);
    for (int t = 0; t < 256; ++t) {
        if (!p.split(t)) {
            continue;
        }
        const double w0 = static_cast<double>(p.n0(t)) / n;
        const double w1 = static_cast<double>(p.n1(t)) / n;
        const double d = p.mean0(t) - p.mean1(t);
        c[t] = w0 * w1 * d * d;
    }
    return c;
}

// Kapur, Sahoo & Wong (1985): H0 + H1 with Hk = ln Pk - (sum p ln p) / Pk.
Curve max_entropy_curve(const Histogram& h, const Prefix& p)
{
    Curve c = blank();
    const double n = static_cast<double>(p.total);
    std::array<double, 256> plogp{};
    double acc = 0.0;
    for (int i = 0; i < 256; ++i) {
        if (h.bins[i] != 0) {
            const double pi = static_cast<double>(h.bins[i]) / n;
            acc += pi * std::log(pi);
        }
        plogp[i] = acc;
    }
    const double total_plogp = acc;
    for (int t = 0; t < 256; ++t) {
        if (!p.split(t)) {
            continue;
        }
        const double p0 = static_cast<double>(p.n0(t)) / n;
        const double p1 = static_cast<double>(p.n1(t)) / n;
        const double h0 = std::log(p0) - plogp[t] / p0;
        const double h1 = std::log(p1) - (total_plogp - plogp[t]) / p1;
        c[t] = h0 + h1;
    }
    return c;
}

// Renyi entropy of order alpha: Hk = ln(sum (p/Pk)^alpha) / (1 - alpha).
Curve renyi_curve(const Histogram& h, const Prefix& p, double alpha)
{
    if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
        throw Error(ErrorCode::InvalidArgument, "Renyi order must be positive and different from 1");
    }
    Curve c = blank();
    const double n = static_cast<double>(p.total);
    std::array<double, 256> pa{};
    double acc = 0.0;
    for (int i = 0; i < 256; ++i) {
        if (h.bins[i] != 0) {
            acc += std::pow(static_cast<double>(h.bins[i]) / n, alpha);
        }
        pa[i] = acc;
    }
    const double total_pa = acc;
    const double k = 1.0 / (1.0 - alpha);
    for (int t = 0; t < 256; ++t) {
        if (!p.split(t)) {
            continue;
        }
        const double p0 = static_cast<double>(p.n0(t)) / n;
        const double p1 = static_cast<double>(p.n1(t)) / n;
        const double h0 = k * (std::log(pa[t]) - alpha * std::log(p0));
        const double h1 = k * (std::log(total_pa - pa[t]) - alpha * std::log(p1));
        c[t] = h0 + h1;
    }
    return c;
}

// Yen, Chang & Chang (1995): -ln(G0 G1) + 2 ln(P0 P1), G = sum of squared probabilities.
Curve yen_curve(const Histogram& h, const Prefix& p)
{
    Curve c = blank();
    const double n = static_cast<double>(p.total);
    std::array<double, 256> sq{};
    double acc = 0.0;
    for (int i = 0; i < 256; ++i) {
        const double pi = static_cast<double>(h.bins[i]) / n;
        acc += pi * pi;
        sq[i] = acc;
    }
    const double total_sq = acc;
    for (int t = 0; t < 256; ++t) {
        if (!p.split(t)) {
            continue;
        }
        const double p0 = static_cast<double>(p.n0(t)) / n;
        const double p1 = static_cast<double>(p.n1(t)) / n;
        const double g1 = total_sq - sq[t];
        if (!(g1 > 0.0)) {
            continue;
        }
        c[t] = -std::log(sq[t] * g1) + 2.0 * std::log(p0 * p1);
    }
    return c;
}

double shannon(double mu)
{
    double s = 0.0;
    if (mu > 0.0) {
        s -= mu * std::log(mu);
    }
    if (mu < 1.0) {
        s -= (1.0 - mu) * std::log(1.0 - mu);
    }
    return s;
}

// Huang & Wang (1995): Shannon fuzziness of membership 1 / (1 + |i - mu_k| / C),
// C = last - first occupied bin, minimised.
Curve huang_curve(const Histogram& h, const Prefix& p)
{
    Curve c = blank();
    const double span = static_cast<double>(p.last - p.first);
    const double n = static_cast<double>(p.total);
    for (int t = 0; t < 256; ++t) {
        if (!p.split(t)) {
            continue;
        }
        const double mu0 = p.mean0(t);
        const double mu1 = p.mean1(t);
        double ent = 0.0;
        for (int i = p.first; i <= p.last; ++i) {
            if (h.bins[i] == 0) {
                continue;
            }
            const double centre = i <= t ? mu0 : mu1;
            const double member = 1.0 / (1.0 + std::abs(i - centre) / span);
            ent += static_cast<double>(h.bins[i]) * shannon(member);
        }
        c[t] = ent / n;
    }
    return c;
}

// Li & Lee (1993) minimum cross entropy, constant term dropped:
// -m0 ln mu0 - m1 ln mu1, with mk the first moment of class k.
Curve li_scan_curve(const Prefix& p)
{
    Curve c = blank();
    const double n = static_cast<double>(p.total);
    for (int t = 0; t < 256; ++t) {
        if (!p.split(t)) {
            continue;
        }
        const double m0 = static_cast<double>(p.sum[t]) / n;
        const double m1 = static_cast<double>(p.sum[255] - p.sum[t]) / n;
        double eta = 0.0;
        if (m0 > 0.0) {
            eta -= m0 * std::log(p.mean0(t));
        }
        if (m1 > 0.0) {
            eta -= m1 * std::log(p.mean1(t));
        }
        c[t] = eta;
    }
    return c;
}

// Tsai (1985): moment-preserving two-level fit gives the lower-class fraction p0;
// the criterion is |P0(t) - p0|, minimised.
Curve moments_curve(const Histogram& h, const Prefix& p)
{
    Curve c = blank();
    const double n = static_cast<double>(p.total);
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    for (int i = 0; i < 256; ++i) {
        const double pi = static_cast<double>(h.bins[i]) / n;
        m1 += i * pi;
        m2 += static_cast<double>(i) * i * pi;
        m3 += static_cast<double>(i) * i * i * pi;
    }
    const double cd = m2 - m1 * m1;
    if (!(cd > 0.0)) {
        return c;
    }
    const double c0 = (-m2 * m2 + m1 * m3) / cd;
    const double c1 = (m1 * m2 - m3) / cd;
    const double root = std::sqrt(std::max(0.0, c1 * c1 - 4.0 * c0));
    const double z0 = 0.5 * (-c1 - root);
    const double z1 = 0.5 * (-c1 + root);
    if (!(z1 > z0)) {
        return c;
    }
    const double p0 = (z1 - m1) / (z1 - z0);
    for (int t = p.first; t <= p.last; ++t) {
        c[t] = std::abs(static_cast<double>(p.n0(t)) / n - p0);
    }
    return c;
}

// Shanbhag (1994): |E_back - E_obj| of the information measures built from the
// cumulative memberships of each class, minimised.
Curve shanbhag_curve(const Histogram& h, const Prefix& p)
{
    Curve c = blank();
    const double n = static_cast<double>(p.total);
    auto cum = [&](int k) { return k < 0 ? 0.0 : static_cast<double>(p.count[k]) / n; };
    for (int t = 0; t < 256; ++t) {
        if (!p.split(t)) {
            continue;
        }
        const double p0 = cum(t);
        const double p1 = 1.0 - p0;

        double back = 0.0;
        double term = 0.5 / p0;
        for (int i = 1; i <= t; ++i) {
            if (h.bins[i] != 0) {
                back -= static_cast<double>(h.bins[i]) / n * std::log(1.0 - term * cum(i - 1));
            }
        }
        back *= term;

        double obj = 0.0;
        term = 0.5 / p1;
        for (int i = t + 1; i < 256; ++i) {
            if (h.bins[i] != 0) {
                obj -= static_cast<double>(h.bins[i]) / n * std::log(1.0 - term * (1.0 - cum(i)));
            }
        }
        obj *= term;
        c[t] = std::abs(back - obj);
    }
    return c;
}

// Zack, Rogers & Latt (1977): line from the histogram peak to one bin past the end
// of the longer tail; the criterion is the perpendicular distance of each bin top
// below that line, maximised. Ties in tail length use the lower side.
Curve triangle_curve(const Histogram& h, const Prefix& p)
{
    Curve c = blank();
    int peak = 0;
    for (int i = 1; i < 256; ++i) {
        if (h.bins[i] > h.bins[peak]) {
            peak = i;
        }
    }
    const double height = static_cast<double>(h.bins[peak]);
    const bool left = (peak - p.first) >= (p.last - peak);
    const double end = left ? p.first - 1.0 : p.last + 1.0;
    const double dx = std::abs(peak - end);
    const double scale = dx / std::sqrt(dx * dx + height * height);
    const int from = left ? p.first : peak;
    const int to = left ? peak : p.last;
    for (int t = from; t <= to; ++t) {
        const double line = height * std::abs(t - end) / dx;
        c[t] = (line - static_cast<double>(h.bins[t])) * scale;
    }
    return c;
}

int arg_best(const Curve& c, bool maximise)
{
    int best = -1;
    for (int t = 0; t < 256; ++t) {
        if (std::isnan(c[t])) {
            continue;
        }
        if (best < 0 || (maximise ? c[t] > c[best] : c[t] < c[best])) {
            best = t;
        }
    }
    return best;
}

int clamp_support(int t, const Prefix& p) { return std::clamp(t, p.first, p.last); }

// Ridler & Calvard (1978): T <- (mu0(T) + mu1(T)) / 2 from the mean.
int isodata(const Prefix& p)
{
    double T = static_cast<double>(p.sum[255]) / static_cast<double>(p.total);
    for (int iter = 0; iter < kIterCap; ++iter) {
        const int t = std::clamp(static_cast<int>(std::floor(T)), p.first, p.last - 1);
        const double next = 0.5 * (p.mean0(t) + p.mean1(t));
        const bool done = std::abs(next - T) <= 0.5;
        T = next;
        if (done) {
            break;
        }
    }
    return std::clamp(static_cast<int>(std::floor(T)), p.first, p.last - 1);
}

// Kittler & Illingworth (1986), iterative form: solve the quadratic where the two
// weighted Gaussian class densities are equal, starting from the mean.
int min_error(const Histogram& h, const Prefix& p)
{
    std::array<double, 256> sq{};
    double acc = 0.0;
    for (int i = 0; i < 256; ++i) {
        acc += static_cast<double>(i) * i * static_cast<double>(h.bins[i]);
        sq[i] = acc;
    }
    const double n = static_cast<double>(p.total);
    int t = std::clamp(static_cast<int>(p.sum[255] / p.total), p.first, p.last - 1);
    for (int iter = 0; iter < kIterCap; ++iter) {
        const double a0 = static_cast<double>(p.n0(t));
        const double a1 = static_cast<double>(p.n1(t));
        const double mu = p.mean0(t);
        const double nu = p.mean1(t);
        const double prior0 = a0 / n;
        const double prior1 = a1 / n;
        const double sigma2 = sq[t] / a0 - mu * mu;
        const double tau2 = (sq[255] - sq[t]) / a1 - nu * nu;
        if (!(sigma2 > 0.0) || !(tau2 > 0.0)) {
            break;
        }
        const double w0 = 1.0 / sigma2 - 1.0 / tau2;
        const double w1 = mu / sigma2 - nu / tau2;
        const double w2 =
            mu * mu / sigma2 - nu * nu / tau2 + std::log((sigma2 * prior1 * prior1) / (tau2 * prior0 * prior0));
        const double disc = w1 * w1 - w0 * w2;
        if (disc < 0.0 || w0 == 0.0) {
            break;
        }
        const double root = (w1 + std::sqrt(disc)) / w0;
        if (!std::isfinite(root)) {
            break;
        }
        const int next = std::clamp(static_cast<int>(std::floor(root)), p.first, p.last - 1);
        if (std::abs(next - t) <= 0.5) {
            break;
        }
        t = next;
    }
    return t;
}

// Li & Tam (1998): T <- (mu0 - mu1) / (ln mu0 - ln mu1) from the mean.
int li_iterative(const Prefix& p)
{
    double estimate = static_cast<double>(p.sum[255]) / static_cast<double>(p.total);
    int t = std::clamp(static_cast<int>(estimate + 0.5), p.first, p.last - 1);
    for (int iter = 0; iter < kIterCap; ++iter) {
        t = std::clamp(static_cast<int>(estimate + 0.5), p.first, p.last - 1);
        const double mu0 = p.mean0(t);
        const double mu1 = p.mean1(t);
        if (!(mu0 > 0.0) || !(mu1 > mu0)) {
            break;
        }
        const double next = (mu0 - mu1) / (std::log(mu0) - std::log(mu1));
        const bool done = std::abs(next - estimate) <= 0.5;
        estimate = next;
        if (done) {
            t = std::clamp(static_cast<int>(estimate + 0.5), p.first, p.last - 1);
            break;
        }
    }
    return t;
}

bool bimodal(const std::array<double, 256>& y, int& peak1, int& peak2)
{
    int modes = 0;
    for (int k = 1; k < 255; ++k) {
        if (y[k - 1] < y[k] && y[k + 1] < y[k]) {
            ++modes;
            if (modes == 1) {
                peak1 = k;
            } else if (modes == 2) {
                peak2 = k;
            } else {
                return false;
            }
        }
    }
    return modes == 2;
}

// Prewitt & Mendelsohn (1966): smooth until two modes remain.
std::array<double, 256> smooth_to_bimodal(const Histogram& h, MethodId m, int& peak1, int& peak2)
{
    std::array<double, 256> y{};
    for (int i = 0; i < 256; ++i) {
        y[i] = static_cast<double>(h.bins[i]);
    }
    int iter = 0;
    while (!bimodal(y, peak1, peak2)) {
        if (iter++ >= kSmoothCap) {
            throw Error(ErrorCode::NotBimodal, std::string(name(m)) + ": histogram not bimodal after " +
                                                   std::to_string(kSmoothCap) + " smoothing passes");
        }
        std::array<double, 256> s{};
        s[0] = (y[0] + y[1]) / 3.0;
        s[255] = (y[254] + y[255]) / 3.0;
        for (int i = 1; i < 255; ++i) {
            s[i] = (y[i - 1] + y[i] + y[i + 1]) / 3.0;
        }
        y = s;
    }
    return y;
}

}  // namespace

std::string_view name(MethodId m)
{
    switch (m) {
    case MethodId::Huang: return "Huang";
    case MethodId::Intermodes: return "Intermodes";
    case MethodId::IsoData: return "IsoData";
    case MethodId::Li: return "Li";
    case MethodId::MaxEntropy: return "MaxEntropy";
    case MethodId::Mean: return "Mean";
    case MethodId::MinError: return "MinError";
    case MethodId::Minimum: return "Minimum";
    case MethodId::Moments: return "Moments";
    case MethodId::Otsu: return "Otsu";
    case MethodId::Percentile: return "Percentile";
    case MethodId::RenyiEntropy: return "RenyiEntropy";
    case MethodId::Shanbhag: return "Shanbhag";
    case MethodId::Triangle: return "Triangle";
    case MethodId::Yen: return "Yen";
    }
    return "?";
}

std::optional<MethodId> parse_method(std::string_view text)
{
    auto lower = [](std::string_view s) {
        std::string out(s);
        for (auto& ch : out) {
            ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
        return out;
    };
    const std::string want = lower(text);
    for (auto m : kAllMethods) {
        if (lower(name(m)) == want) {
            return m;
        }
    }
    return std::nullopt;
}

bool is_scan_method(MethodId m, const MethodParams& params)
{
    switch (m) {
    case MethodId::Otsu:
    case MethodId::MaxEntropy:
    case MethodId::Yen:
    case MethodId::RenyiEntropy:
    case MethodId::Huang:
    case MethodId::Moments:
    case MethodId::Shanbhag:
    case MethodId::Triangle:
        return true;
    case MethodId::Li:
        return params.li == LiVariant::Scan;
    default:
        return false;
    }
}

bool maximises(MethodId m)
{
    switch (m) {
    case MethodId::Otsu:
    case MethodId::MaxEntropy:
    case MethodId::Yen:
    case MethodId::RenyiEntropy:
    case MethodId::Triangle:
        return true;
    default:
        return false;
    }
}

std::array<double, 256> criterion_curve(const Histogram& h, MethodId m, const MethodParams& params)
{
    if (h.total == 0) {
        throw Error(ErrorCode::InvalidArgument, "empty histogram");
    }
    if (!is_scan_method(m, params)) {
        throw Error(ErrorCode::InvalidArgument, std::string(name(m)) + " is not a criterion-scan method");
    }
    const Prefix p(h);
    switch (m) {
    case MethodId::Otsu: return otsu_curve(p);
    case MethodId::MaxEntropy: return max_entropy_curve(h, p);
    case MethodId::Yen: return yen_curve(h, p);
    case MethodId::RenyiEntropy: return renyi_curve(h, p, params.renyi_order);
    case MethodId::Huang: return huang_curve(h, p);
    case MethodId::Li: return li_scan_curve(p);
    case MethodId::Moments: return moments_curve(h, p);
    case MethodId::Shanbhag: return shanbhag_curve(h, p);
    case MethodId::Triangle: return triangle_curve(h, p);
    default: break;
    }
    return blank();
}

int classical_threshold(const Histogram& h, MethodId m, const MethodParams& params)
{
    if (h.total == 0) {
        throw Error(ErrorCode::InvalidArgument, "empty histogram");
    }
    const Prefix p(h);

    if (m == MethodId::Mean) {
        return static_cast<int>(p.sum[255] / p.total);
    }
    if (m == MethodId::Percentile) {
        if (!(params.percentile > 0.0 && params.percentile <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "percentile must lie in (0, 1]");
        }
        const double target = params.percentile * static_cast<double>(p.total);
        for (int t = 0; t < 256; ++t) {
            if (static_cast<double>(p.count[t]) >= target) {
                return t;
            }
        }
        return p.last;
    }
    if (p.first == p.last) {
        degenerate(m);
    }

    if (is_scan_method(m, params)) {
        const int t = arg_best(criterion_curve(h, m, params), maximises(m));
        if (t < 0) {
            degenerate(m);
        }
        return t;
    }

    switch (m) {
    case MethodId::IsoData: return isodata(p);
    case MethodId::MinError: return min_error(h, p);
    case MethodId::Li: return li_iterative(p);
    case MethodId::Intermodes: {
        int a = 0;
        int b = 0;
        smooth_to_bimodal(h, m, a, b);
        return clamp_support((a + b) / 2, p);
    }
    case MethodId::Minimum: {
        int a = 0;
        int b = 0;
        const auto y = smooth_to_bimodal(h, m, a, b);
        int best = a;
        for (int i = a + 1; i <= b; ++i) {
            if (y[i] < y[best]) {
                best = i;
            }
        }
        return clamp_support(best, p);
    }
    default: break;
    }
    degenerate(m);
}

}  // namespace footlab::classical
