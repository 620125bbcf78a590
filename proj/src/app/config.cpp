#include "footlab/app/config.h"

#include "footlab/error.h"

#include <fstream>

namespace footlab::app {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& key, const std::string& what)
{
    throw Error(ErrorCode::SchemaError, "'" + key + "': " + what);
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    const auto it = j.find(key);
    if (it == j.end()) {
        return;
    }
    try {
        if constexpr (std::is_same_v<T, int>) {
            if (!it->is_number_integer()) {
                schema(key, "expected an integer");
            }
        } else if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number()) {
                schema(key, "expected a number");
            }
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) {
                schema(key, "expected true or false");
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) {
                schema(key, "expected a string");
            }
        }
        out = it->get<T>();
    } catch (const json::exception& e) {
        schema(key, e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys, const std::string& where)
{
    if (!j.is_object()) {
        schema(where.empty() ? "config" : where, "expected an object");
    }
    for (const auto& [k, v] : j.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            schema(where.empty() ? k : where + "." + k, "unknown key");
        }
    }
}

const char* polarity_name(soit::Polarity p) { return p == soit::Polarity::DarkForeground ? "dark" : "bright"; }
const char* divisor_name(soit::Divisor d) { return d == soit::Divisor::PerAxis ? "per-axis" : "literal-width"; }

json span_json(const measure::Span& s) { return {{"start", s.start}, {"end", s.end}}; }

}  // namespace

void SessionConfig::validate() const
{
    measure.validate();
    if (!(classical.percentile > 0.0 && classical.percentile < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "percentile must lie in (0,1)");
    }
    if (!(classical.renyi_order > 0.0) || classical.renyi_order == 1.0) {
        throw Error(ErrorCode::InvalidArgument, "renyi_order must be positive and not 1");
    }
    if (const auto* f = std::get_if<FixedSplit>(&measure.split); f && (f->row < 0 || f->band_rows < 0)) {
        throw Error(ErrorCode::InvalidArgument, "fixed split row and band must be non-negative");
    }
    if (const auto* a = std::get_if<AutoSplit>(&measure.split); a && a->band_rows < 1) {
        throw Error(ErrorCode::InvalidArgument, "auto split band_rows must be at least 1");
    }
}

json to_json(const soit::SearchConfig& s)
{
    return {{"lo", s.lo},
            {"hi", s.hi},
            {"step", s.step},
            {"min_frac", s.noise.min_frac},
            {"max_frac", s.noise.max_frac},
            {"edge_weight", s.noise.edge_weight},
            {"polarity", polarity_name(s.polarity)},
            {"divisor", divisor_name(s.noise.divisor)},
            {"denoise",
             {{"remove_max", s.denoise.remove_max},
              {"fill_min", s.denoise.fill_min},
              {"max_iters", s.denoise.max_iters}}}};
}

json to_json(const SessionConfig& c)
{
    const auto& m = c.measure;
    json j;
    j["background"] = m.background ? json(*m.background) : json("auto");
    j["background_region"] = m.background_region ? json{{"x", m.background_region->x},
                                                        {"y", m.background_region->y},
                                                        {"width", m.background_region->width},
                                                        {"height", m.background_region->height}}
                                                  : json(nullptr);
    j["delta"] = m.delta;
    j["curve_fraction"] = m.curve_fraction;
    j["bias_cm"] = m.bias_correction_cm;
    if (const auto* f = std::get_if<FixedSplit>(&m.split)) {
        j["split"] = {{"mode", "fixed"}, {"row", f->row}, {"band_rows", f->band_rows}};
    } else {
        j["split"] = {{"mode", "auto"}, {"band_rows", std::get<AutoSplit>(m.split).band_rows}};
    }
    j["search"] = to_json(m.search);
    j["classical"] = {{"percentile", c.classical.percentile},
                      {"renyi_order", c.classical.renyi_order},
                      {"li", c.classical.li == classical::LiVariant::Iterative ? "iterative" : "scan"}};
    j["profile"] = c.profile_path;
    j["no_plots"] = c.no_plots;
    return j;
}

soit::SearchConfig search_from_json(const json& j, soit::SearchConfig s)
{
    reject_unknown(j, {"lo", "hi", "step", "min_frac", "max_frac", "edge_weight", "polarity", "divisor", "denoise"},
                   "search");
    read(j, "lo", s.lo);
    read(j, "hi", s.hi);
    read(j, "step", s.step);
    read(j, "min_frac", s.noise.min_frac);
    read(j, "max_frac", s.noise.max_frac);
    read(j, "edge_weight", s.noise.edge_weight);
    std::string text;
    if (j.contains("polarity")) {
        read(j, "polarity", text);
        if (text == "dark") s.polarity = soit::Polarity::DarkForeground;
        else if (text == "bright") s.polarity = soit::Polarity::BrightForeground;
        else schema("search.polarity", "expected dark or bright");
    }
    if (j.contains("divisor")) {
        read(j, "divisor", text);
        if (text == "per-axis") s.noise.divisor = soit::Divisor::PerAxis;
        else if (text == "literal-width") s.noise.divisor = soit::Divisor::LiteralWidth;
        else schema("search.divisor", "expected per-axis or literal-width");
    }
    if (const auto it = j.find("denoise"); it != j.end()) {
        reject_unknown(*it, {"remove_max", "fill_min", "max_iters"}, "search.denoise");
        read(*it, "remove_max", s.denoise.remove_max);
        read(*it, "fill_min", s.denoise.fill_min);
        read(*it, "max_iters", s.denoise.max_iters);
    }
    s.validate();
    return s;
}

SessionConfig config_from_json(const json& j, SessionConfig c)
{
    reject_unknown(j, {"background", "background_region", "delta", "curve_fraction", "bias_cm", "split", "search",
                       "classical", "profile", "no_plots"},
                   "");
    auto& m = c.measure;
    if (const auto it = j.find("background"); it != j.end()) {
        if (it->is_string() && it->get<std::string>() == "auto") {
            m.background.reset();
        } else if (it->is_number_integer()) {
            m.background = it->get<int>();
        } else {
            schema("background", "expected \"auto\" or an integer");
        }
    }
    if (const auto it = j.find("background_region"); it != j.end()) {
        if (it->is_null()) {
            m.background_region.reset();
        } else {
            reject_unknown(*it, {"x", "y", "width", "height"}, "background_region");
            Rect r;
            read(*it, "x", r.x);
            read(*it, "y", r.y);
            read(*it, "width", r.width);
            read(*it, "height", r.height);
            m.background_region = r;
        }
    }
    read(j, "delta", m.delta);
    read(j, "curve_fraction", m.curve_fraction);
    read(j, "bias_cm", m.bias_correction_cm);
    if (const auto it = j.find("split"); it != j.end()) {
        reject_unknown(*it, {"mode", "row", "band_rows"}, "split");
        std::string mode = "auto";
        read(*it, "mode", mode);
        if (mode == "auto") {
            AutoSplit a;
            read(*it, "band_rows", a.band_rows);
            m.split = a;
        } else if (mode == "fixed") {
            FixedSplit f;
            if (!it->contains("row")) {
                schema("split.row", "required for fixed mode");
            }
            read(*it, "row", f.row);
            read(*it, "band_rows", f.band_rows);
            m.split = f;
        } else {
            schema("split.mode", "expected auto or fixed");
        }
    }
    if (const auto it = j.find("search"); it != j.end()) {
        m.search = search_from_json(*it, m.search);
    }
    if (const auto it = j.find("classical"); it != j.end()) {
        reject_unknown(*it, {"percentile", "renyi_order", "li"}, "classical");
        read(*it, "percentile", c.classical.percentile);
        read(*it, "renyi_order", c.classical.renyi_order);
        if (it->contains("li")) {
            std::string li;
            read(*it, "li", li);
            if (li == "iterative") c.classical.li = classical::LiVariant::Iterative;
            else if (li == "scan") c.classical.li = classical::LiVariant::Scan;
            else schema("classical.li", "expected iterative or scan");
        }
    }
    read(j, "profile", c.profile_path);
    read(j, "no_plots", c.no_plots);
    c.validate();
    return c;
}

SessionConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open config " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, path + ": " + e.what());
    }
    return config_from_json(j);
}

json to_json(const soit::NoiseReport& r)
{
    return {{"threshold", r.threshold},
            {"z", r.z},
            {"mean_row_noise", r.mean_row_noise},
            {"mean_col_noise", r.mean_col_noise},
            {"edge_noise", r.edge_noise},
            {"nac", r.nac},
            {"nac_fraction", r.nac_fraction},
            {"feasible", r.feasible}};
}

json diagnostics_json(const measure::Diagnostics& d)
{
    return {{"background", d.background},
            {"split_row", d.split_row},
            {"side_cols", span_json(d.side_cols)},
            {"side_rows", span_json(d.side_rows)},
            {"mid_col", d.mid_col},
            {"under_cols", span_json(d.under.cols)},
            {"under_rows", span_json(d.under.rows)},
            {"under_length_px", d.under.length_px},
            {"under_width_px", d.under.width_px},
            {"under_threshold", to_json(d.under_threshold)},
            {"side_px_per_cm", d.side_px_per_cm},
            {"under_px_per_cm", d.under_px_per_cm}};
}

json to_json(const measure::FootMeasurements& m, bool with_curve)
{
    json j = {{"length_side_cm", m.length_side_cm},
              {"length_under_cm", m.length_under_cm},
              {"height_cm", m.height_cm},
              {"width_cm", m.width_cm},
              {"distance_to_background_px", m.distance_to_background_px},
              {"diagnostics", diagnostics_json(m.diagnostics)}};
    if (with_curve) {
        json curve = json::array();
        for (const auto& p : m.upper_curve) {
            curve.push_back({p.col, p.row});
        }
        j["upper_curve"] = std::move(curve);
    }
    return j;
}

}  // namespace footlab::app
