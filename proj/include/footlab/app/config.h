#pragma once

#include "footlab/classical.h"
#include "footlab/measure.h"
#include "footlab/soit.h"

#include <json.hpp>

#include <string>

namespace footlab::app {

/// Operator session settings shared by the CLI and the service.
struct SessionConfig {
    measure::MeasureParams measure;  ///< background (auto when unset), delta, search, ...
    classical::MethodParams classical;
    std::string profile_path;        ///< calibration profile used by measure/batch
    bool no_plots = false;           ///< omit curves from batch output

    const soit::SearchConfig& search() const { return measure.search; }

    /// Throws InvalidArgument.
    void validate() const;
};

nlohmann::json to_json(const soit::SearchConfig& s);
nlohmann::json to_json(const SessionConfig& c);

/// Overlays the keys present in `j` onto `base`; unknown keys and type mismatches
/// throw SchemaError naming the key, range violations throw InvalidArgument.
soit::SearchConfig search_from_json(const nlohmann::json& j, soit::SearchConfig base = {});
SessionConfig config_from_json(const nlohmann::json& j, SessionConfig base = {});

SessionConfig load_config(const std::string& path);

nlohmann::json to_json(const soit::NoiseReport& r);
nlohmann::json to_json(const measure::FootMeasurements& m, bool with_curve = true);
nlohmann::json diagnostics_json(const measure::Diagnostics& d);

}  // namespace footlab::app
