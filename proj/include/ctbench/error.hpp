#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctbench {

enum class ErrorCode {
    // market-data
    UnreadableSource,
    NoCommonTimespan,
    NonPositivePrice,
    InvalidCandle,
    IrregularTimestamps,
    InvalidWindow,
    OffsetOutOfRange,
    // features
    UnknownFeature,
    WindowTooLong,
    // tsg-core
    FitFailed,
    ModeUnsupported,
    NotTrained,
    ShapeMismatch,
    DegenerateCovariance,
    SchemaVersionUnsupported,
    PayloadShapeMismatch,
    BadManifest,
    MissingBundle,
    ExternalCommandFailed,
    // forecasting
    EmptyTrainingSet,
    FeatureMismatch,
    CorruptModel,
    // tasks
    NonMeanReverting,
    DegenerateSeries,
    AllAssetsExcluded,
    // strategies-sim
    TooFewAssets,
    DegeneratePredictions,
    Bankruptcy,
    // metrics
    MissingPhase,
    InconsistentGrouping,
    // bench-cli
    ParseError,
    UnknownKey,
    InvalidValue,
    EmptyYear,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable error code. All library
/// operations report contract violations through this type.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ctbench
