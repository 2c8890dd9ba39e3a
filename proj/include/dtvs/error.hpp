#pragma once

#include <stdexcept>
#include <string>

namespace dtvs
{

enum class ErrorCode
{
    MissingField,
    OutOfRange,
    InconsistentTimescales,
    UnknownKey,
    BadLadder,
    EmptyGroup,
    UnassignedUser,
    NonMonotonicTimestamp,
    AttributeMismatch,
    TooFewSamples,
    UnknownGroup,
    NoUsers,
    EmptyDemands,
    GridTooFine,
    UnknownUser,
    EmptyMetrics,
    Io,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the simulator carries one of the codes above so
/// callers (and the CSV error column) can tell them apart without parsing text.
class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          m_code(code)
    {
    }

    ErrorCode code() const noexcept
    {
        return m_code;
    }

  private:
    ErrorCode m_code;
};

} // namespace dtvs
