// footlab command-line driver.
#include "footlab/app/commands.h"
#include "footlab/app/config.h"
#include "footlab/app/service.h"
#include "footlab/error.h"
#include "footlab/image_io.h"
#include "footlab/stats.h"
#include "footlab/synth.h"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace footlab;
namespace fs = std::filesystem;

namespace {

struct SearchFlags {
    std::optional<int> lo, hi, step;
    std::optional<double> min_frac, max_frac, edge_weight;
    std::optional<std::string> polarity;
    bool literal_divisor = false;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--lo", lo, "lowest threshold searched");
        cmd->add_option("--hi", hi, "highest threshold searched");
        cmd->add_option("--step", step, "threshold step");
        cmd->add_option("--min-frac", min_frac, "lower bound on the accepted-pixel fraction");
        cmd->add_option("--max-frac", max_frac, "upper bound on the accepted-pixel fraction");
        cmd->add_option("--edge-weight", edge_weight, "weight of border pixels in the objective");
        cmd->add_option("--polarity", polarity, "dark or bright foreground")->check(CLI::IsMember({"dark", "bright"}));
        cmd->add_flag("--literal-divisor", literal_divisor, "divide both noise sums by the image width");
    }

    void apply(soit::SearchConfig& s) const
    {
        if (lo) s.lo = *lo;
        if (hi) s.hi = *hi;
        if (step) s.step = *step;
        if (min_frac) s.noise.min_frac = *min_frac;
        if (max_frac) s.noise.max_frac = *max_frac;
        if (edge_weight) s.noise.edge_weight = *edge_weight;
        if (polarity) s.polarity = *polarity == "dark" ? soit::Polarity::DarkForeground : soit::Polarity::BrightForeground;
        if (literal_divisor) s.noise.divisor = soit::Divisor::LiteralWidth;
    }
};

struct MeasureFlags {
    std::optional<std::string> bg;
    std::optional<int> delta;
    std::optional<double> curve_fraction, bias_cm;
    std::optional<int> split_row;
    std::string profile;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--bg", bg, "side-view background brightness: auto or 0-255");
        cmd->add_option("--delta", delta, "darkness margin below the background");
        cmd->add_option("--curve-fraction", curve_fraction, "share of the foot length traced on the upper curve");
        cmd->add_option("--bias-cm", bias_cm, "correction added to under-view length and width");
        cmd->add_option("--split-row", split_row, "first row of the separator band (default: detect)");
        cmd->add_option("--profile", profile, "calibration profile");
    }

    void apply(app::SessionConfig& c) const
    {
        auto& m = c.measure;
        if (bg) {
            if (*bg == "auto") {
                m.background.reset();
            } else {
                int v = 0;
                std::istringstream in(*bg);
                if (!(in >> v) || !in.eof()) {
                    throw Error(ErrorCode::InvalidArgument, "--bg expects auto or an integer, got '" + *bg + "'");
                }
                m.background = v;
            }
        }
        if (delta) m.delta = *delta;
        if (curve_fraction) m.curve_fraction = *curve_fraction;
        if (bias_cm) m.bias_correction_cm = *bias_cm;
        if (split_row) m.split = FixedSplit{*split_row, 0};
        if (!profile.empty()) c.profile_path = profile;
        c.validate();
    }
};

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw Error(ErrorCode::IoError, "cannot write " + path);
    }
}

std::string read_text(const std::string& path)
{
    const auto bytes = read_file(path);
    return std::string(bytes.begin(), bytes.end());
}

std::vector<std::string> collect_inputs(const std::vector<std::string>& args)
{
    std::vector<std::string> out;
    for (const auto& a : args) {
        if (fs::is_directory(a)) {
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(a)) {
                auto ext = e.path().extension().string();
                for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
                if (e.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) {
                    found.push_back(e.path().string());
                }
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(a);
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App cli{"Foot photograph thresholding and measurement"};
    cli.require_subcommand(1);

    std::string config_path;
    cli.add_option("--config", config_path, "session config JSON");

    // threshold
    auto* th = cli.add_subcommand("threshold", "threshold one image and write its mask");
    std::string th_image, th_method = "soit", th_out, th_curve;
    bool th_no_plots = false;
    SearchFlags th_search;
    th->add_option("image", th_image, "input PNG or JPEG")->required();
    th->add_option("--method", th_method, "soit or a classical method name");
    th->add_option("--out", th_out, "mask PNG (default: <image>_mask.png)");
    th->add_option("--curve", th_curve, "objective curve CSV (soit)");
    th->add_flag("--no-plots", th_no_plots, "skip the curve output");
    th_search.add(th);

    // bench
    auto* bench = cli.add_subcommand("bench", "IoU of every method on the synthetic lighting tiers");
    std::vector<std::string> bench_tiers{"good", "average", "poor"}, bench_methods{"all"};
    std::vector<std::uint64_t> bench_seeds{1};
    std::string bench_out;
    SearchFlags bench_search;
    bench->add_option("--tiers", bench_tiers, "good, average, poor")->delimiter(',');
    bench->add_option("--methods", bench_methods, "methods or all")->delimiter(',');
    bench->add_option("--seed", bench_seeds, "scene seeds")->delimiter(',');
    bench->add_option("--out", bench_out, "CSV path (default stdout)");
    bench_search.add(bench);

    // measure / batch share flags
    std::vector<std::string> m_inputs;
    std::string m_out;
    unsigned m_jobs = 0;
    bool m_no_plots = false;
    MeasureFlags m_flags;
    SearchFlags m_search;
    auto* meas = cli.add_subcommand("measure", "measure one foot photograph");
    meas->add_option("image", m_inputs, "input photograph")->required()->expected(1);
    auto* batch = cli.add_subcommand("batch", "measure many photographs");
    batch->add_option("inputs", m_inputs, "photographs or directories")->required();
    batch->add_option("--jobs", m_jobs, "worker threads (default: all cores)");
    for (auto* cmd : {meas, batch}) {
        cmd->add_option("--out", m_out, "CSV path (default stdout); diagnostics go to <out>.diagnostics.json");
        cmd->add_flag("--no-plots", m_no_plots, "leave upper curves out of the diagnostics");
        m_flags.add(cmd);
        m_search.add(cmd);
    }

    // stats
    auto* st = cli.add_subcommand("stats", "validation statistics for a paired manual/image dataset");
    std::string st_input, st_out, st_tail = "two";
    st->add_option("dataset", st_input, "CSV with manual and image-based columns")->required();
    st->add_option("--tail", st_tail, "two or one sided tests")->check(CLI::IsMember({"two", "one"}));
    st->add_option("--out", st_out, "CSV path (default stdout)");

    // calibrate
    auto* cal = cli.add_subcommand("calibrate", "fit scale functions from cube observations");
    std::string cal_input, cal_out, cal_date;
    double cal_cube = 5.0;
    cal->add_option("observations", cal_input, "CSV: view,distance_px,px_per_cm|cube_px")->required();
    cal->add_option("--cube-cm", cal_cube, "cube edge length for cube_px columns");
    cal->add_option("--fit-date", cal_date, "date recorded in the profile");
    cal->add_option("--out", cal_out, "profile path (default stdout)");

    // synth
    auto* sy = cli.add_subcommand("synth", "render synthetic scenes with ground truth");
    std::string sy_kind, sy_out = ".", sy_tier = "good";
    std::uint64_t sy_seed = 1;
    sy->add_option("kind", sy_kind, "tier or foot")->required()->check(CLI::IsMember({"tier", "foot"}));
    sy->add_option("--tier", sy_tier, "lighting tier")->check(CLI::IsMember({"good", "average", "poor"}));
    sy->add_option("--seed", sy_seed, "scene seed");
    sy->add_option("--out", sy_out, "output directory");

    // serve
    auto* sv = cli.add_subcommand("serve", "run the HTTP service");
    std::string sv_host = "127.0.0.1";
    int sv_port = 8080;
    sv->add_option("--host", sv_host, "bind address");
    sv->add_option("--port", sv_port, "port (0 = any free port)");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        app::SessionConfig cfg = config_path.empty() ? app::SessionConfig{} : app::load_config(config_path);

        if (*th) {
            app::ThresholdRequest req{th_method, cfg.search(), cfg.classical};
            th_search.apply(req.search);
            const GrayImage img = [&] {
                try {
                    return load_gray_file(th_image);
                } catch (const Error& e) {
                    throw e.with_stage("load");
                }
            }();
            const auto t0 = std::chrono::steady_clock::now();
            const auto o = app::run_threshold(img, req);
            const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            const std::string mask_path =
                th_out.empty() ? (fs::path(th_image).parent_path() / (fs::path(th_image).stem().string() + "_mask.png")).string()
                               : th_out;
            write_file(mask_path, encode_png(o.mask));
            if (!th_curve.empty() && !th_no_plots && !cfg.no_plots) {
                std::ostringstream os;
                soit::write_curve_csv(os, o.curve);
                write_text(th_curve, os.str());
            }
            app::write_threshold_report(std::cout, o);
            std::cout << "mask=" << mask_path << "\n";
            std::fprintf(stderr, "elapsed_ms=%.3f\n", ms);
        } else if (*bench) {
            bench_search.apply(cfg.measure.search);
            std::vector<synth::Tier> tiers;
            for (const auto& t : bench_tiers) {
                const auto tier = synth::parse_tier(t);
                if (!tier) {
                    throw Error(ErrorCode::InvalidArgument, "unknown tier '" + t + "'");
                }
                tiers.push_back(*tier);
            }
            std::ostringstream os;
            app::write_bench_csv(os, app::run_bench(tiers, bench_methods, bench_seeds, cfg));
            write_text(bench_out, os.str());
        } else if (*meas || *batch) {
            m_flags.apply(cfg);
            m_search.apply(cfg.measure.search);
            cfg.validate();
            const auto inputs = collect_inputs(m_inputs);
            if (inputs.empty()) {
                throw Error(ErrorCode::EmptyInput, "no input images");
            }
            if (cfg.profile_path.empty()) {
                throw Error(ErrorCode::CalibrationMissing, "--profile is required");
            }
            const auto profile = calib::load_profile(cfg.profile_path);
            const auto items = app::run_batch(inputs, profile, cfg.measure, *meas ? 1 : m_jobs);
            std::size_t ok = 0;
            for (const auto& item : items) {
                if (item.result) {
                    ++ok;
                } else {
                    std::cerr << item.input << ": " << item.error << "\n";
                }
            }
            std::ostringstream os;
            app::write_measure_csv(os, items);
            write_text(m_out, os.str());
            if (!m_out.empty() && m_out != "-") {
                write_text(m_out + ".diagnostics.json",
                           app::batch_sidecar(items, !(m_no_plots || cfg.no_plots)).dump(2) + "\n");
            }
            if (ok == 0) {
                return 2;
            }
        } else if (*st) {
            const auto data = stats::load_dataset(st_input);
            std::ostringstream os;
            stats::write_report_csv(os, stats::validation_report(
                                            data, st_tail == "one" ? stats::Tail::OneSided : stats::Tail::TwoSided));
            write_text(st_out, os.str());
        } else if (*cal) {
            const auto obs = app::parse_observations_csv(read_text(cal_input), cal_cube);
            write_text(cal_out, calib::format_profile(app::calibrate(obs, cal_date)));
        } else if (*sy) {
            fs::create_directories(sy_out);
            if (sy_kind == "tier") {
                const auto scene = synth::generate(synth::lighting_tier(*synth::parse_tier(sy_tier), sy_seed));
                synth::write_scene_pngs(scene, sy_out, sy_tier + "_" + std::to_string(sy_seed));
            } else {
                const auto spec = synth::random_foot_spec(sy_seed);
                const auto scene = synth::generate_foot(spec);
                const std::string stem = "foot_" + std::to_string(sy_seed);
                write_file(fs::path(sy_out) / (stem + ".png"), encode_png(scene.photo));
                write_text((fs::path(sy_out) / (stem + ".profile")).string(), calib::format_profile(scene.profile));
                const nlohmann::json truth = {{"length_cm", scene.truth.length_cm},
                                              {"width_cm", scene.truth.width_cm},
                                              {"height_cm", scene.truth.height_cm},
                                              {"distance_px", scene.truth.distance_px},
                                              {"band_start", scene.band_start}};
                write_text((fs::path(sy_out) / (stem + "_truth.json")).string(), truth.dump(2) + "\n");
            }
        } else if (*sv) {
            app::Service service(cfg);
            const int port = service.bind(sv_host, sv_port);
            if (port < 0) {
                throw Error(ErrorCode::IoError, "cannot bind " + sv_host + ":" + std::to_string(sv_port));
            }
            std::fprintf(stderr, "listening on %s:%d\n", sv_host.c_str(), port);
            service.run();
        }
    } catch (const Error& e) {
        std::cerr << "footlab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "footlab: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
