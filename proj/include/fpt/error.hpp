#pragma once

#include <stdexcept>
#include <string>

namespace fpt {

enum class ErrorCode {
    InvalidModel,
    QuadratureFailure,
    UnstableSystem,
    IntermediateCase,
    HeavyTail,
    InvalidDrift,
    CramerInstead,
    DivergentDelta,
    OutsideUniformRange,
    InvalidHorizon,
    Unsupported,
    MissingCumulant,
    NoBracket,
    ValidityViolated,
    NoConvergence,
    FitResidualTooLarge,
    ZeroLevel,
    SeriesNotDecaying,
    RegimeMismatch,
    WindowOverflow,
    SlowDecay,
    NonPositive,
    Overflow,
    TiltUnavailable,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace fpt
