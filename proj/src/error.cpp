#include "footlab/error.h"

namespace footlab {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::BandNotFound: return "BandNotFound";
    case ErrorCode::NoFeasibleThreshold: return "NoFeasibleThreshold";
    case ErrorCode::NotBimodal: return "NotBimodal";
    case ErrorCode::DegenerateHistogram: return "DegenerateHistogram";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::FootNotFound: return "FootNotFound";
    case ErrorCode::ColumnEmpty: return "ColumnEmpty";
    case ErrorCode::CurveNotFound: return "CurveNotFound";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::CalibrationMissing: return "CalibrationMissing";
    case ErrorCode::ProfileParseError: return "ProfileParseError";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::SchemaError: return "SchemaError";
    }
    return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& detail, const std::string& stage)
{
    std::string msg;
    if (!stage.empty()) {
        msg += "[" + stage + "] ";
    }
    msg += to_string(code);
    if (!detail.empty()) {
        msg += ": " + detail;
    }
    return msg;
}

}  // namespace

Error::Error(ErrorCode code, std::string detail, std::string stage)
    : std::runtime_error(format_message(code, detail, stage)),
      code_(code),
      detail_(std::move(detail)),
      stage_(std::move(stage))
{
}

Error Error::with_stage(std::string_view stage) const
{
    std::string label(stage);
    if (!stage_.empty()) {
        label += "/" + stage_;
    }
    return Error(code_, detail_, std::move(label));
}

}  // namespace footlab
