#include "gazekit/error.hpp"

namespace gazekit {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::WrongCardinality: return "WrongCardinality";
    case ErrorCode::DuplicateVariant: return "DuplicateVariant";
    case ErrorCode::MissingDecisionSentence: return "MissingDecisionSentence";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DegenerateBBox: return "DegenerateBBox";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::MixedBenchmarks: return "MixedBenchmarks";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::RealSamplePresent: return "RealSamplePresent";
    case ErrorCode::EmptyRun: return "EmptyRun";
    case ErrorCode::NonMonotonicSteps: return "NonMonotonicSteps";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::NoMatchedOutputs: return "NoMatchedOutputs";
    case ErrorCode::MissingGenLen: return "MissingGenLen";
    case ErrorCode::MissingPersonCount: return "MissingPersonCount";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace gazekit
