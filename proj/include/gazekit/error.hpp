#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gazekit {

enum class ErrorCode {
    WrongCardinality,
    DuplicateVariant,
    MissingDecisionSentence,
    IndexOutOfRange,
    DegenerateBBox,
    EmptyBand,
    ZeroDimension,
    DimensionMismatch,
    EmptyPartition,
    MissingKey,
    UnknownClass,
    MixedBenchmarks,
    MissingClass,
    RealSamplePresent,
    EmptyRun,
    NonMonotonicSteps,
    EmptyList,
    NoMatchedOutputs,
    MissingGenLen,
    MissingPersonCount,
    SchemaViolation,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the toolkit; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Schema violation tied to a line of a line-delimited input file (1-based).
class SchemaError : public Error {
public:
    SchemaError(std::size_t line, const std::string& what)
        : Error(ErrorCode::SchemaViolation, "line " + std::to_string(line) + ": " + what),
          line_(line), detail_(what) {}
    SchemaError(const std::string& source, std::size_t line, const std::string& what)
        : Error(ErrorCode::SchemaViolation, source + ": line " + std::to_string(line) + ": " + what),
          line_(line), detail_(what) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

} // namespace gazekit
