#include "footlab/calibration.h"

#include "footlab/error.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace footlab::calib {

namespace {

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(int line, const std::string& what)
{
    throw Error(ErrorCode::ProfileParseError, "line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view text, int line)
{
    text = trim(text);
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        parse_fail(line, "not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::vector<ScaleObservation> parse_observations(std::string_view text, int line)
{
    std::vector<ScaleObservation> out;
    text = trim(text);
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            parse_fail(line, "observation '" + std::string(item) + "' is not distance:px_per_cm");
        }
        out.push_back({parse_number(item.substr(0, colon), line), parse_number(item.substr(colon + 1), line)});
        if (comma == std::string_view::npos) {
            break;
        }
        text = text.substr(comma + 1);
    }
    return out;
}

}  // namespace

std::string_view name(View v) { return v == View::Side ? "side" : "under"; }

std::optional<View> parse_view(std::string_view text)
{
    if (text == "side") {
        return View::Side;
    }
    if (text == "under") {
        return View::Under;
    }
    return std::nullopt;
}

ScaleFunction fit_scale(std::span<const ScaleObservation> obs, View view)
{
    if (obs.size() < 2) {
        throw Error(ErrorCode::InsufficientData, "a scale fit needs at least two observations");
    }
    for (const auto& o : obs) {
        if (!(o.distance_px >= 0.0) || !(o.px_per_cm > 0.0) || !std::isfinite(o.distance_px) ||
            !std::isfinite(o.px_per_cm)) {
            throw Error(ErrorCode::InvalidArgument, "observations need distance_px >= 0 and px_per_cm > 0");
        }
    }
    // Centred sums keep the normal equations well conditioned.
    const double n = static_cast<double>(obs.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& o : obs) {
        mx += o.distance_px;
        my += o.px_per_cm;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& o : obs) {
        const double dx = o.distance_px - mx;
        sxx += dx * dx;
        sxy += dx * (o.px_per_cm - my);
    }
    if (sxx == 0.0) {
        throw Error(ErrorCode::DegenerateFit, "all observations share one distance");
    }
    const double slope = sxy / sxx;
    return ScaleFunction{slope, my - slope * mx, view};
}

double px_to_cm(const ScaleFunction& f, double distance_px, double length_px)
{
    const double scale = f(distance_px);
    if (!(scale > 0.0)) {
        throw Error(ErrorCode::NonPositiveScale,
                    std::string(name(f.view)) + " scale at distance " + num(distance_px) + " is " + num(scale));
    }
    return length_px / scale;
}

double cm_to_px(const ScaleFunction& f, double distance_px, double length_cm)
{
    const double scale = f(distance_px);
    if (!(scale > 0.0)) {
        throw Error(ErrorCode::NonPositiveScale,
                    std::string(name(f.view)) + " scale at distance " + num(distance_px) + " is " + num(scale));
    }
    return length_cm * scale;
}

const ScaleFunction& CalibrationProfile::function(View v) const
{
    const auto& cal = v == View::Side ? side : under;
    if (!cal) {
        throw Error(ErrorCode::CalibrationMissing, "no " + std::string(name(v)) + " calibration in profile");
    }
    return cal->function;
}

void write_profile(std::ostream& out, const CalibrationProfile& profile)
{
    out << "# footlab calibration profile\n";
    out << "format_version = " << CalibrationProfile::kFormatVersion << "\n";
    out << "fit_date = " << profile.fit_date << "\n";
    for (View v : {View::Side, View::Under}) {
        const auto& cal = v == View::Side ? profile.side : profile.under;
        if (!cal) {
            continue;
        }
        out << "\n[" << name(v) << "]\n";
        out << "slope = " << num(cal->function.slope) << "\n";
        out << "intercept = " << num(cal->function.intercept) << "\n";
        out << "observations = ";
        for (std::size_t i = 0; i < cal->observations.size(); ++i) {
            if (i != 0) {
                out << ", ";
            }
            out << num(cal->observations[i].distance_px) << ":" << num(cal->observations[i].px_per_cm);
        }
        out << "\n";
    }
}

std::string format_profile(const CalibrationProfile& profile)
{
    std::ostringstream os;
    write_profile(os, profile);
    return os.str();
}

CalibrationProfile parse_profile(std::string_view text)
{
    CalibrationProfile profile;
    std::optional<View> section;
    struct Pending {
        std::optional<double> slope;
        std::optional<double> intercept;
        std::vector<ScaleObservation> observations;
        int line = 0;
        bool seen = false;
    };
    Pending pending[2];
    bool version_seen = false;

    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        const auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                parse_fail(line_no, "unterminated section header");
            }
            section = parse_view(line.substr(1, line.size() - 2));
            if (!section) {
                parse_fail(line_no, "unknown section '" + std::string(line) + "'");
            }
            auto& p = pending[static_cast<int>(*section)];
            if (p.seen) {
                parse_fail(line_no, "duplicate section '" + std::string(line) + "'");
            }
            p.seen = true;
            p.line = line_no;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            parse_fail(line_no, "expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));

        if (!section) {
            if (key == "format_version") {
                const double v = parse_number(value, line_no);
                if (v != CalibrationProfile::kFormatVersion) {
                    parse_fail(line_no, "unsupported format_version " + std::string(value));
                }
                version_seen = true;
            } else if (key == "fit_date") {
                profile.fit_date = std::string(value);
            } else {
                parse_fail(line_no, "unknown key '" + std::string(key) + "'");
            }
            continue;
        }
        auto& p = pending[static_cast<int>(*section)];
        if (key == "slope") {
            p.slope = parse_number(value, line_no);
        } else if (key == "intercept") {
            p.intercept = parse_number(value, line_no);
        } else if (key == "observations") {
            p.observations = parse_observations(value, line_no);
        } else {
            parse_fail(line_no, "unknown key '" + std::string(key) + "'");
        }
    }
    if (!version_seen) {
        parse_fail(line_no, "missing format_version");
    }
    for (View v : {View::Side, View::Under}) {
        const auto& p = pending[static_cast<int>(v)];
        if (!p.seen) {
            continue;
        }
        if (!p.slope || !p.intercept) {
            parse_fail(p.line, "section [" + std::string(name(v)) + "] needs slope and intercept");
        }
        ViewCalibration cal{ScaleFunction{*p.slope, *p.intercept, v}, p.observations};
        (v == View::Side ? profile.side : profile.under) = std::move(cal);
    }
    return profile;
}

CalibrationProfile load_profile(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::CalibrationMissing, "cannot open calibration profile " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_profile(ss.str());
}

}  // namespace footlab::calib
