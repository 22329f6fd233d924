#include "fpt/error.hpp"

namespace fpt {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidModel: return "InvalidModel";
        case ErrorCode::QuadratureFailure: return "QuadratureFailure";
        case ErrorCode::UnstableSystem: return "UnstableSystem";
        case ErrorCode::IntermediateCase: return "IntermediateCase";
        case ErrorCode::HeavyTail: return "HeavyTail";
        case ErrorCode::InvalidDrift: return "InvalidDrift";
        case ErrorCode::CramerInstead: return "CramerInstead";
        case ErrorCode::DivergentDelta: return "DivergentDelta";
        case ErrorCode::OutsideUniformRange: return "OutsideUniformRange";
        case ErrorCode::InvalidHorizon: return "InvalidHorizon";
        case ErrorCode::Unsupported: return "Unsupported";
        case ErrorCode::MissingCumulant: return "MissingCumulant";
        case ErrorCode::NoBracket: return "NoBracket";
        case ErrorCode::ValidityViolated: return "ValidityViolated";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::FitResidualTooLarge: return "FitResidualTooLarge";
        case ErrorCode::ZeroLevel: return "ZeroLevel";
        case ErrorCode::SeriesNotDecaying: return "SeriesNotDecaying";
        case ErrorCode::RegimeMismatch: return "RegimeMismatch";
        case ErrorCode::WindowOverflow: return "WindowOverflow";
        case ErrorCode::SlowDecay: return "SlowDecay";
        case ErrorCode::NonPositive: return "NonPositive";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::TiltUnavailable: return "TiltUnavailable";
    }
    return "Unknown";
}

}  // namespace fpt
