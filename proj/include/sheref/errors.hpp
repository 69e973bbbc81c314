#pragma once

#include <stdexcept>
#include <string>

namespace sheref {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CapExceeded : Error { using Error::Error; };
struct NonContiguousTime : Error { using Error::Error; };
struct NotPreviouslyActive : Error { using Error::Error; };

struct SupportViolation : Error { using Error::Error; };
struct MissingHistory : Error { using Error::Error; };

struct MissingLr : Error { using Error::Error; };
struct NegativeLr : Error { using Error::Error; };

struct CapViolation : Error { using Error::Error; };
struct NonFiniteInput : Error { using Error::Error; };

struct EmptyTraceList : Error { using Error::Error; };
struct MismatchedHorizons : Error { using Error::Error; };

struct ConfigError : Error { using Error::Error; };

} // namespace sheref
