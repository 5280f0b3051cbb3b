#include "vfdt_rf/error.hpp"

namespace vfdt_rf {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NonFiniteSample: return "NonFiniteSample";
        case ErrorCode::BadSampleRate: return "BadSampleRate";
        case ErrorCode::BadWindowConfig: return "BadWindowConfig";
        case ErrorCode::DegenerateWindow: return "DegenerateWindow";
        case ErrorCode::WindowTooShort: return "WindowTooShort";
        case ErrorCode::StreamTooShort: return "StreamTooShort";
        case ErrorCode::InsufficientLags: return "InsufficientLags";
        case ErrorCode::OddBitCount: return "OddBitCount";
        case ErrorCode::BadArgument: return "BadArgument";
        case ErrorCode::NegativeImbalance: return "NegativeImbalance";
        case ErrorCode::NegativeOffset: return "NegativeOffset";
        case ErrorCode::EmptyFleet: return "EmptyFleet";
        case ErrorCode::NoLocations: return "NoLocations";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::OddFloatCount: return "OddFloatCount";
        case ErrorCode::BadSidecar: return "BadSidecar";
        case ErrorCode::DuplicatePair: return "DuplicatePair";
        case ErrorCode::DanglingSidecar: return "DanglingSidecar";
        case ErrorCode::RecordingTooShort: return "RecordingTooShort";
        case ErrorCode::TooFewExamples: return "TooFewExamples";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptyTestSet: return "EmptyTestSet";
        case ErrorCode::BadFileFormat: return "BadFileFormat";
        case ErrorCode::MissingLocation: return "MissingLocation";
        case ErrorCode::NothingToExport: return "NothingToExport";
    }
    return "Unknown";
}

}  // namespace vfdt_rf
