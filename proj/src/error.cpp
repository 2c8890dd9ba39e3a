#include "dtvs/error.hpp"

namespace dtvs
{

const char*
to_string(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::MissingField:
        return "MissingField";
    case ErrorCode::OutOfRange:
        return "OutOfRange";
    case ErrorCode::InconsistentTimescales:
        return "InconsistentTimescales";
    case ErrorCode::UnknownKey:
        return "UnknownKey";
    case ErrorCode::BadLadder:
        return "BadLadder";
    case ErrorCode::EmptyGroup:
        return "EmptyGroup";
    case ErrorCode::UnassignedUser:
        return "UnassignedUser";
    case ErrorCode::NonMonotonicTimestamp:
        return "NonMonotonicTimestamp";
    case ErrorCode::AttributeMismatch:
        return "AttributeMismatch";
    case ErrorCode::TooFewSamples:
        return "TooFewSamples";
    case ErrorCode::UnknownGroup:
        return "UnknownGroup";
    case ErrorCode::NoUsers:
        return "NoUsers";
    case ErrorCode::EmptyDemands:
        return "EmptyDemands";
    case ErrorCode::GridTooFine:
        return "GridTooFine";
    case ErrorCode::UnknownUser:
        return "UnknownUser";
    case ErrorCode::EmptyMetrics:
        return "EmptyMetrics";
    case ErrorCode::Io:
        return "Io";
    }
    return "Unknown";
}

} // namespace dtvs
