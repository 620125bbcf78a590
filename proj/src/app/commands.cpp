#include "footlab/app/commands.h"

#include "footlab/classical.h"
#include "footlab/error.h"
#include "footlab/image_io.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace footlab::app {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string num(double v, const char* format = "%.9g")
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

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

}  // namespace

ThresholdOutcome run_threshold(const GrayImage& img, const ThresholdRequest& req, const soit::ProgressFn& progress)
{
    req.search.validate();
    ThresholdOutcome out{.method = {},
                         .threshold = 0,
                         .mask = Mask::empty(img.width(), img.height()),
                         .best = {},
                         .curve = {},
                         .criterion = {},
                         .score = {}};
    if (lower(req.method) == "soit") {
        auto r = soit::soit_search(img, req.search, progress);
        out.method = "soit";
        out.threshold = r.best.threshold;
        out.score = r.best;
        out.best = r.best;
        out.curve = std::move(r.curve);
        out.mask = std::move(r.mask);
        return out;
    }
    const auto m = classical::parse_method(req.method);
    if (!m) {
        throw Error(ErrorCode::InvalidArgument, "unknown method '" + req.method + "'");
    }
    const Histogram h = histogram(img);
    out.method = std::string(classical::name(*m));
    out.threshold = classical::classical_threshold(h, *m, req.classical);
    if (classical::is_scan_method(*m, req.classical)) {
        out.criterion = classical::criterion_curve(h, *m, req.classical)[out.threshold];
    }
    if (req.search.polarity == soit::Polarity::DarkForeground) {
        out.mask = soit::binarize(img, out.threshold, soit::Polarity::DarkForeground);
    } else if (out.threshold < 255) {
        out.mask = soit::binarize(img, out.threshold + 1, soit::Polarity::BrightForeground);
    }
    out.score = soit::noise_score(out.mask, req.search.noise);
    out.score.threshold = out.threshold;
    if (progress) {
        progress(1.0);
    }
    return out;
}

void write_threshold_report(std::ostream& out, const ThresholdOutcome& o)
{
    out << "method=" << o.method << "\n";
    out << "threshold=" << o.threshold << "\n";
    out << "z=" << num(o.score.z) << "\n";
    out << "nac_fraction=" << num(o.score.nac_fraction) << "\n";
    out << "feasible=" << (o.score.feasible ? "true" : "false") << "\n";
    if (o.criterion) {
        out << "criterion=" << num(*o.criterion) << "\n";
    }
}

std::vector<std::string> expand_methods(const std::vector<std::string>& methods)
{
    std::vector<std::string> out;
    for (const auto& m : methods) {
        if (lower(m) == "all") {
            out.push_back("soit");
            for (auto id : classical::kAllMethods) {
                out.emplace_back(classical::name(id));
            }
        } else if (lower(m) == "soit") {
            out.push_back("soit");
        } else if (const auto id = classical::parse_method(m)) {
            out.emplace_back(classical::name(*id));
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown method '" + m + "'");
        }
    }
    return out;
}

std::vector<BenchRow> run_bench(const std::vector<synth::Tier>& tiers, const std::vector<std::string>& methods,
                                const std::vector<std::uint64_t>& seeds, const SessionConfig& cfg)
{
    const auto names = expand_methods(methods);
    std::vector<BenchRow> rows;
    for (auto tier : tiers) {
        for (auto seed : seeds) {
            const auto scene = synth::generate(synth::lighting_tier(tier, seed));
            for (const auto& method : names) {
                BenchRow row{tier, method, seed};
                try {
                    const auto o = run_threshold(scene.image, {method, cfg.search(), cfg.classical});
                    row.threshold = o.threshold;
                    row.iou = synth::iou(o.mask, scene.truth);
                } catch (const Error& e) {
                    row.status = std::string(to_string(e.code()));
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows)
{
    out << "tier,method,seed,threshold,iou,status\n";
    for (const auto& r : rows) {
        out << synth::name(r.tier) << ',' << r.method << ',' << r.seed << ',' << r.threshold << ','
            << num(r.iou, "%.6f") << ',' << r.status << '\n';
    }
}

std::vector<MeasureItem> run_batch(const std::vector<std::string>& inputs, const calib::CalibrationProfile& profile,
                                   const measure::MeasureParams& params, unsigned threads, const ImageLoader& loader)
{
    if (inputs.empty()) {
        throw Error(ErrorCode::EmptyInput, "no input images");
    }
    params.validate();
    std::vector<MeasureItem> items(inputs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < inputs.size(); i = next++) {
            auto& item = items[i];
            item.input = inputs[i];
            try {
                const GrayImage img = [&] {
                    try {
                        return loader ? loader(inputs[i]) : load_gray_file(inputs[i]);
                    } catch (const Error& e) {
                        throw e.with_stage("load");
                    }
                }();
                item.result = measure::measure_foot(img, profile, params);
            } catch (const std::exception& e) {
                item.error = e.what();
            }
        }
    };
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, inputs.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    return items;
}

void write_measure_csv(std::ostream& out, const std::vector<MeasureItem>& items)
{
    out << "image,length_side_cm,length_under_cm,height_cm,width_cm,distance_px\n";
    for (const auto& item : items) {
        if (!item.result) {
            continue;
        }
        const auto& m = *item.result;
        out << item.input << ',' << num(m.length_side_cm, "%.6f") << ',' << num(m.length_under_cm, "%.6f") << ','
            << num(m.height_cm, "%.6f") << ',' << num(m.width_cm, "%.6f") << ',' << m.distance_to_background_px
            << '\n';
    }
}

nlohmann::json batch_sidecar(const std::vector<MeasureItem>& items, bool with_curves)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& item : items) {
        nlohmann::json j = {{"image", item.input}, {"ok", item.result.has_value()}};
        if (item.result) {
            j["measurements"] = to_json(*item.result, with_curves);
        } else {
            j["error"] = item.error;
        }
        arr.push_back(std::move(j));
    }
    return {{"items", std::move(arr)}};
}

std::vector<std::pair<calib::View, calib::ScaleObservation>> parse_observations_csv(std::string_view csv,
                                                                                    double cube_cm)
{
    std::vector<std::string_view> lines;
    while (!csv.empty()) {
        const auto nl = csv.find('\n');
        if (const auto line = trim(csv.substr(0, nl)); !line.empty() && line.front() != '#') {
            lines.push_back(line);
        }
        csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    }
    if (lines.empty()) {
        throw Error(ErrorCode::SchemaError, "observations file is empty");
    }
    const auto header = split_csv(lines[0]);
    auto col = [&](std::string_view name) -> std::optional<std::size_t> {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto view_col = col("view");
    const auto dist_col = col("distance_px");
    const auto ppc_col = col("px_per_cm");
    const auto cube_col = col("cube_px");
    if (!view_col) {
        throw Error(ErrorCode::SchemaError, "missing column 'view'");
    }
    if (!dist_col) {
        throw Error(ErrorCode::SchemaError, "missing column 'distance_px'");
    }
    if (!ppc_col && !cube_col) {
        throw Error(ErrorCode::SchemaError, "missing column 'px_per_cm' (or 'cube_px')");
    }
    if (!ppc_col && !(cube_cm > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "cube size must be positive");
    }

    std::vector<std::pair<calib::View, calib::ScaleObservation>> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        const std::string where = "row " + std::to_string(i);
        if (cells.size() != header.size()) {
            throw Error(ErrorCode::SchemaError, where + ": expected " + std::to_string(header.size()) + " fields");
        }
        auto number = [&](std::size_t c, const char* name) {
            double v = 0.0;
            const auto cell = cells[c];
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw Error(ErrorCode::SchemaError,
                            where + ", column '" + name + "': not a number: '" + std::string(cell) + "'");
            }
            return v;
        };
        const auto view = calib::parse_view(cells[*view_col]);
        if (!view) {
            throw Error(ErrorCode::SchemaError,
                        where + ", column 'view': expected side or under, got '" + std::string(cells[*view_col]) + "'");
        }
        calib::ScaleObservation o;
        o.distance_px = number(*dist_col, "distance_px");
        o.px_per_cm = ppc_col ? number(*ppc_col, "px_per_cm") : number(*cube_col, "cube_px") / cube_cm;
        out.emplace_back(*view, o);
    }
    return out;
}

calib::CalibrationProfile calibrate(const std::vector<std::pair<calib::View, calib::ScaleObservation>>& obs,
                                    const std::string& fit_date)
{
    calib::CalibrationProfile profile;
    profile.fit_date = fit_date;
    for (auto view : {calib::View::Side, calib::View::Under}) {
        std::vector<calib::ScaleObservation> mine;
        for (const auto& [v, o] : obs) {
            if (v == view) {
                mine.push_back(o);
            }
        }
        if (mine.empty()) {
            continue;
        }
        try {
            (view == calib::View::Side ? profile.side : profile.under) =
                calib::ViewCalibration{calib::fit_scale(mine, view), mine};
        } catch (const Error& e) {
            throw e.with_stage(calib::name(view));
        }
    }
    if (!profile.side && !profile.under) {
        throw Error(ErrorCode::InsufficientData, "no observations for either view");
    }
    return profile;
}

}  // namespace footlab::app
