#include "remirl/error.hpp"

namespace remirl {

const char* error_name(Errc code) noexcept {
    switch (code) {
        case Errc::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
        case Errc::SelfDirectedEvent: return "SelfDirectedEvent";
        case Errc::MixedTimestampPresence: return "MixedTimestampPresence";
        case Errc::EndTimeBeforeLastEvent: return "EndTimeBeforeLastEvent";
        case Errc::EmptyActionSpace: return "EmptyActionSpace";
        case Errc::MalformedRow: return "MalformedRow";
        case Errc::UnknownColumn: return "UnknownColumn";
        case Errc::EmptyFile: return "EmptyFile";
        case Errc::CovariateDimensionMismatch: return "CovariateDimensionMismatch";
        case Errc::EventOutsideActionSpace: return "EventOutsideActionSpace";
        case Errc::MissingTimestamps: return "MissingTimestamps";
        case Errc::MissingEndTime: return "MissingEndTime";
        case Errc::DegenerateStatistic: return "DegenerateStatistic";
        case Errc::UnclassifiableEvent: return "UnclassifiableEvent";
        case Errc::UnobservedStateAction: return "UnobservedStateAction";
        case Errc::StateSpaceTooLarge: return "StateSpaceTooLarge";
        case Errc::EmptyDemonstrations: return "EmptyDemonstrations";
        case Errc::RealizedStateNotInCandidates: return "RealizedStateNotInCandidates";
        case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(line ? message + " (line " + std::to_string(*line) + ")" : message),
      code_(code),
      line_(line) {}

} // namespace remirl
