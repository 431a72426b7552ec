#include "ctbench/error.hpp"

namespace ctbench {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnreadableSource: return "UnreadableSource";
        case ErrorCode::NoCommonTimespan: return "NoCommonTimespan";
        case ErrorCode::NonPositivePrice: return "NonPositivePrice";
        case ErrorCode::InvalidCandle: return "InvalidCandle";
        case ErrorCode::IrregularTimestamps: return "IrregularTimestamps";
        case ErrorCode::InvalidWindow: return "InvalidWindow";
        case ErrorCode::OffsetOutOfRange: return "OffsetOutOfRange";
        case ErrorCode::UnknownFeature: return "UnknownFeature";
        case ErrorCode::WindowTooLong: return "WindowTooLong";
        case ErrorCode::FitFailed: return "FitFailed";
        case ErrorCode::ModeUnsupported: return "ModeUnsupported";
        case ErrorCode::NotTrained: return "NotTrained";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
        case ErrorCode::SchemaVersionUnsupported: return "SchemaVersionUnsupported";
        case ErrorCode::PayloadShapeMismatch: return "PayloadShapeMismatch";
        case ErrorCode::BadManifest: return "BadManifest";
        case ErrorCode::MissingBundle: return "MissingBundle";
        case ErrorCode::ExternalCommandFailed: return "ExternalCommandFailed";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::FeatureMismatch: return "FeatureMismatch";
        case ErrorCode::CorruptModel: return "CorruptModel";
        case ErrorCode::NonMeanReverting: return "NonMeanReverting";
        case ErrorCode::DegenerateSeries: return "DegenerateSeries";
        case ErrorCode::AllAssetsExcluded: return "AllAssetsExcluded";
        case ErrorCode::TooFewAssets: return "TooFewAssets";
        case ErrorCode::DegeneratePredictions: return "DegeneratePredictions";
        case ErrorCode::Bankruptcy: return "Bankruptcy";
        case ErrorCode::MissingPhase: return "MissingPhase";
        case ErrorCode::InconsistentGrouping: return "InconsistentGrouping";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::UnknownKey: return "UnknownKey";
        case ErrorCode::InvalidValue: return "InvalidValue";
        case ErrorCode::EmptyYear: return "EmptyYear";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace ctbench
