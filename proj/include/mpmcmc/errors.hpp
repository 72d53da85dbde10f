#pragma once

#include <stdexcept>
#include <string>

namespace mpmcmc {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A feature was requested from a component that does not support it
/// (e.g. gradients from a gradient-free target).
struct CapabilityError : Error {
  using Error::Error;
};

/// Parameters violate a structural requirement (K out of range etc).
struct InvalidConfigError : Error {
  using Error::Error;
};

/// The chain is in a state the algorithm cannot proceed from,
/// e.g. the current point has zero target mass.
struct InvalidStateError : Error {
  using Error::Error;
};

/// An argument lies outside the mathematical domain of a formula.
struct DomainError : Error {
  using Error::Error;
};

/// An exhaustive computation would exceed its enumeration budget.
struct SizeError : Error {
  using Error::Error;
};

/// An input failed a contract that the operation requires (e.g.
/// a non-reversible kernel passed to a spectral routine).
struct ContractError : Error {
  using Error::Error;
};

/// A chain or kernel is degenerate for the requested quantity
/// (zero spectral gap denominator, zero variance direction, ...).
struct DegenerateError : Error {
  using Error::Error;
};

/// Selection probabilities contain NaN or similar garbage.
struct MalformedRuleError : Error {
  using Error::Error;
};

/// Step-size tuning could not find any productive step size.
struct TuningError : Error {
  using Error::Error;
};

}  // namespace mpmcmc
