#pragma once
#include <stdexcept>
#include <string>

namespace tub {

// One exception type per failure family named in the contract. All derive from
// Error so callers that only care about "something went wrong" can catch once.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContractError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };
struct DegenerateError : Error { using Error::Error; };   // zero-variance denominators
struct DegeneracyError : Error { using Error::Error; };   // unresolved spectral degeneracy
struct ResolutionError : Error { using Error::Error; };   // grid / series too coarse or short
struct EquilibrationError : Error { using Error::Error; };
struct BlowUpError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace tub
