#include "neckpinch/errors.hpp"

namespace neck {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::NonPositiveRadius: return "NonPositiveRadius";
        case ErrorKind::StepRejected: return "StepRejected";
        case ErrorKind::GraphConditionViolated: return "GraphConditionViolated";
        case ErrorKind::NotAGraph: return "NotAGraph";
        case ErrorKind::MotionTooLarge: return "MotionTooLarge";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::InsufficientHistory: return "InsufficientHistory";
        case ErrorKind::Nonpositive: return "Nonpositive";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

}  // namespace neck
