#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace remirl {

enum class Errc {
    NonMonotoneTimestamps,
    SelfDirectedEvent,
    MixedTimestampPresence,
    EndTimeBeforeLastEvent,
    EmptyActionSpace,
    MalformedRow,
    UnknownColumn,
    EmptyFile,
    CovariateDimensionMismatch,
    EventOutsideActionSpace,
    MissingTimestamps,
    MissingEndTime,
    DegenerateStatistic,
    UnclassifiableEvent,
    UnobservedStateAction,
    StateSpaceTooLarge,
    EmptyDemonstrations,
    RealizedStateNotInCandidates,
    InvalidArgument,
};

/// Stable name of an error kind, as surfaced in CLI error reports.
const char* error_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

    Errc code() const noexcept { return code_; }
    const char* name() const noexcept { return error_name(code_); }
    /// 1-based input line, for ingestion errors.
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    Errc code_;
    std::optional<std::size_t> line_;
};

} // namespace remirl
