#include "footlab/stats.h"

#include "footlab/error.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace footlab::stats {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    while (true) {
        const auto c = line.find(',');
        out.push_back(trim(line.substr(0, c)));
        if (c == std::string_view::npos) {
            return out;
        }
        line = line.substr(c + 1);
    }
}

void check_pairs(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw Error(ErrorCode::InvalidArgument, "paired inputs differ in length (" + std::to_string(x.size()) +
                                                    " vs " + std::to_string(y.size()) + ")");
    }
}

double mean_of(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v)
{
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return ss / static_cast<double>(v.size() - 1);
}

void need_two(std::span<const double> v, const char* what)
{
    if (v.size() < 2) {
        throw Error(ErrorCode::InsufficientData, std::string(what) + " needs at least two values");
    }
}

double beta_cf(double a, double b, double x)
{
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny) {
        d = tiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + aa * d;
        d = std::abs(d) < tiny ? tiny : d;
        c = 1.0 + aa / c;
        c = std::abs(c) < tiny ? tiny : c;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + aa * d;
        d = std::abs(d) < tiny ? tiny : d;
        c = 1.0 + aa / c;
        c = std::abs(c) < tiny ? tiny : c;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) {
            break;
        }
    }
    return h;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

std::vector<double> PairedDataset::column(std::string_view name) const
{
    double PairedRecord::*field = nullptr;
    if (name == "manual_length") field = &PairedRecord::manual_length;
    else if (name == "manual_width") field = &PairedRecord::manual_width;
    else if (name == "manual_height") field = &PairedRecord::manual_height;
    else if (name == "length_side") field = &PairedRecord::length_side;
    else if (name == "length_under") field = &PairedRecord::length_under;
    else if (name == "height") field = &PairedRecord::height;
    else if (name == "width") field = &PairedRecord::width;
    else throw Error(ErrorCode::SchemaError, "unknown column '" + std::string(name) + "'");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r.*field);
    }
    return out;
}

PairedDataset parse_dataset(std::string_view csv)
{
    std::vector<std::string_view> lines;
    while (!csv.empty()) {
        const auto nl = csv.find('\n');
        const auto line = trim(csv.substr(0, nl));
        if (!line.empty()) {
            lines.push_back(line);
        }
        csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    }
    if (lines.empty()) {
        throw Error(ErrorCode::SchemaError, "dataset is empty");
    }
    const auto header = split_csv(lines[0]);
    std::size_t index[std::size(kDatasetColumns)];
    for (std::size_t c = 0; c < std::size(kDatasetColumns); ++c) {
        const auto it = std::find(header.begin(), header.end(), kDatasetColumns[c]);
        if (it == header.end()) {
            throw Error(ErrorCode::SchemaError, "missing column '" + std::string(kDatasetColumns[c]) + "'");
        }
        index[c] = static_cast<std::size_t>(it - header.begin());
    }

    PairedDataset data;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        const std::string where = "row " + std::to_string(i);
        if (cells.size() != header.size()) {
            throw Error(ErrorCode::SchemaError, where + ": expected " + std::to_string(header.size()) +
                                                    " fields, found " + std::to_string(cells.size()));
        }
        double v[std::size(kDatasetColumns)];
        for (std::size_t c = 0; c < std::size(kDatasetColumns); ++c) {
            const auto cell = cells[index[c]];
            const auto* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(cell.data(), end, v[c]);
            if (cell.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v[c])) {
                throw Error(ErrorCode::SchemaError, where + ", column '" + std::string(kDatasetColumns[c]) +
                                                        "': not a number: '" + std::string(cell) + "'");
            }
            if (c > 0 && !(v[c] > 0.0)) {
                throw Error(ErrorCode::SchemaError,
                            where + ", column '" + std::string(kDatasetColumns[c]) + "': value must be positive");
            }
        }
        if (v[0] != std::floor(v[0])) {
            throw Error(ErrorCode::SchemaError, where + ", column 'number': not an integer");
        }
        data.rows.push_back({static_cast<int>(v[0]), v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
    }
    if (data.rows.empty()) {
        throw Error(ErrorCode::SchemaError, "dataset has a header but no rows");
    }
    return data;
}

PairedDataset load_dataset(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open dataset " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_dataset(ss.str());
}

double mae(std::span<const double> actual, std::span<const double> measured)
{
    check_pairs(actual, measured);
    if (actual.empty()) {
        throw Error(ErrorCode::EmptyInput, "mean absolute error of no pairs");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        sum += std::abs(actual[i] - measured[i]);
    }
    return sum / static_cast<double>(actual.size());
}

double quantile_sorted(std::span<const double> sorted, double p)
{
    if (sorted.empty()) {
        throw Error(ErrorCode::EmptyInput, "quantile of no values");
    }
    const double n = static_cast<double>(sorted.size());
    const double pos = std::clamp(p * (n + 1.0), 1.0, n);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo >= sorted.size()) {
        return sorted.back();
    }
    return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

DescriptiveStats descriptive(std::span<const double> v)
{
    need_two(v, "descriptive statistics");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    DescriptiveStats d;
    // Summing the sorted copy keeps the result independent of input order.
    d.mean = mean_of(s);
    d.stdev = std::sqrt(sample_variance(s));
    d.se_mean = d.stdev / std::sqrt(static_cast<double>(s.size()));
    d.minimum = s.front();
    d.maximum = s.back();
    d.q1 = quantile_sorted(s, 0.25);
    d.median = quantile_sorted(s, 0.5);
    d.q3 = quantile_sorted(s, 0.75);
    return d;
}

double pearson(std::span<const double> x, std::span<const double> y)
{
    check_pairs(x, y);
    need_two(x, "correlation");
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw Error(ErrorCode::ZeroVariance, "correlation undefined for a constant input");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0 && b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0 and x in [0,1]");
    }
    if (x == 0.0 || x == 1.0) {
        return x;
    }
    const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * beta_cf(a, b, x) / a;
    }
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df)
{
    if (std::isinf(t)) {
        return t > 0 ? 1.0 : 0.0;
    }
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    return t > 0 ? 1.0 - tail : tail;
}

double f_cdf(double f, double df1, double df2)
{
    if (f <= 0.0) {
        return 0.0;
    }
    if (std::isinf(f)) {
        return 1.0;
    }
    return incomplete_beta(0.5 * df1, 0.5 * df2, df1 * f / (df1 * f + df2));
}

TestResult t_test(std::span<const double> x, std::span<const double> y, Tail tail)
{
    need_two(x, "t test");
    need_two(y, "t test");
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const double vx = sample_variance(x) / nx;
    const double vy = sample_variance(y) / ny;
    const double diff = mean_of(x) - mean_of(y);
    TestResult r;
    if (vx + vy == 0.0) {
        r.statistic = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        r.df1 = nx + ny - 2.0;
        r.p_value = diff == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.statistic = diff / std::sqrt(vx + vy);
    r.df1 = (vx + vy) * (vx + vy) / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
    const double t2 = r.statistic * r.statistic;
    const double two_sided = incomplete_beta(0.5 * r.df1, 0.5, r.df1 / (r.df1 + t2));
    r.p_value = tail == Tail::TwoSided ? two_sided : 0.5 * two_sided;
    return r;
}

TestResult f_test(std::span<const double> x, std::span<const double> y, Tail tail)
{
    need_two(x, "f test");
    need_two(y, "f test");
    const double vx = sample_variance(x);
    const double vy = sample_variance(y);
    if (vy == 0.0) {
        throw Error(ErrorCode::ZeroVariance, "f test with a constant second sample");
    }
    TestResult r;
    r.statistic = vx / vy;
    r.df1 = static_cast<double>(x.size() - 1);
    r.df2 = static_cast<double>(y.size() - 1);
    const double lower = f_cdf(r.statistic, r.df1, r.df2);
    const double smaller = std::min(lower, 1.0 - lower);
    r.p_value = tail == Tail::TwoSided ? std::min(1.0, 2.0 * smaller) : smaller;
    return r;
}

std::vector<ReportColumn> validation_report(const PairedDataset& data, Tail tail)
{
    struct Pair {
        const char* variable;
        const char* image;
        const char* manual;
    };
    static constexpr Pair pairs[] = {{"Length side", "length_side", "manual_length"},
                                     {"Length under", "length_under", "manual_length"},
                                     {"Height", "height", "manual_height"},
                                     {"Width", "width", "manual_width"}};
    std::vector<ReportColumn> out;
    for (const auto& p : pairs) {
        const auto measured = data.column(p.image);
        const auto manual = data.column(p.manual);
        ReportColumn c;
        c.variable = p.variable;
        c.stats = descriptive(measured);
        c.t = t_test(manual, measured, tail);
        c.f = f_test(manual, measured, tail);
        c.pearson = pearson(manual, measured);
        c.mae = mae(manual, measured);
        out.push_back(std::move(c));
    }
    return out;
}

void write_report_csv(std::ostream& out, const std::vector<ReportColumn>& report)
{
    out << "Variable";
    for (const auto& c : report) {
        out << ',' << c.variable;
    }
    out << '\n';
    auto row = [&](const char* label, auto get) {
        out << label;
        for (const auto& c : report) {
            out << ',' << fmt(get(c));
        }
        out << '\n';
    };
    row("Mean", [](const ReportColumn& c) { return c.stats.mean; });
    row("SE Mean", [](const ReportColumn& c) { return c.stats.se_mean; });
    row("StDev", [](const ReportColumn& c) { return c.stats.stdev; });
    row("Minimum", [](const ReportColumn& c) { return c.stats.minimum; });
    row("Q1", [](const ReportColumn& c) { return c.stats.q1; });
    row("Median", [](const ReportColumn& c) { return c.stats.median; });
    row("Q3", [](const ReportColumn& c) { return c.stats.q3; });
    row("Maximum", [](const ReportColumn& c) { return c.stats.maximum; });
    row("t-test p-value", [](const ReportColumn& c) { return c.t.p_value; });
    row("f-test p-value", [](const ReportColumn& c) { return c.f.p_value; });
    row("Pearson correlation", [](const ReportColumn& c) { return c.pearson; });
    row("Mean absolute error", [](const ReportColumn& c) { return c.mae; });
}

}  // namespace footlab::stats
