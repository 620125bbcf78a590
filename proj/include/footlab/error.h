#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace footlab {

enum class ErrorCode {
    InvalidArgument,
    IoError,
    DecodeError,
    UnsupportedFormat,
    BandNotFound,
    NoFeasibleThreshold,
    NotBimodal,
    DegenerateHistogram,
    InsufficientData,
    DegenerateFit,
    NonPositiveScale,
    EmptyRegion,
    FootNotFound,
    ColumnEmpty,
    CurveNotFound,
    EmptyMask,
    CalibrationMissing,
    ProfileParseError,
    SpecInvalid,
    EmptyInput,
    ZeroVariance,
    SchemaError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every failure carries a machine-checkable code and,
/// once it has crossed a pipeline boundary, the label of the stage it came from.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string detail, std::string stage = {});

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }
    const std::string& stage() const noexcept { return stage_; }

    /// Copy of this error labelled with `stage`; an existing label is kept as a suffix.
    Error with_stage(std::string_view stage) const;

private:
    ErrorCode code_;
    std::string detail_;
    std::string stage_;
};

}  // namespace footlab
