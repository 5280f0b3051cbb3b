#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vfdt_rf {

enum class ErrorCode {
    LengthMismatch,
    NonFiniteSample,
    BadSampleRate,
    BadWindowConfig,
    DegenerateWindow,
    WindowTooShort,
    StreamTooShort,
    InsufficientLags,
    OddBitCount,
    BadArgument,
    NegativeImbalance,
    NegativeOffset,
    EmptyFleet,
    NoLocations,
    IoFailure,
    OddFloatCount,
    BadSidecar,
    DuplicatePair,
    DanglingSidecar,
    RecordingTooShort,
    TooFewExamples,
    EmptyClass,
    NonFiniteLoss,
    ShapeMismatch,
    EmptyTestSet,
    BadFileFormat,
    MissingLocation,
    NothingToExport,
};

std::string_view to_string(ErrorCode code);

// Every domain failure in the library is reported through this type so the
// CLI can map it to exit code 1 without inspecting messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised for a degenerate window inside a longer computation; carries the
// index of the failing window (or example slice).
class DegenerateWindowError : public Error {
public:
    DegenerateWindowError(std::size_t index, const std::string& what)
        : Error(ErrorCode::DegenerateWindow, what + " (index " + std::to_string(index) + ")"),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace vfdt_rf
