#pragma once

#include <stdexcept>
#include <string>

namespace rbiga {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside its admissible range (parametric point, parameter value).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Malformed object: knot vector, weights, lattice shape, config document.
class ConstructionError : public Error {
public:
  using Error::Error;
};

/// Refinement request that would break the continuity of the basis.
class RefinementError : public Error {
public:
  using Error::Error;
};

/// Geometry map with (near) vanishing Jacobian determinant.
class SingularMapError : public Error {
public:
  using Error::Error;
};

/// Multipatch topology problem, e.g. a nonconforming interface.
class StructuralError : public Error {
public:
  using Error::Error;
};

/// Request for something deliberately not supported (nonzero Dirichlet data...).
class UnsupportedError : public Error {
public:
  using Error::Error;
};

/// Linear or eigen solver breakdown.
class SolverError : public Error {
public:
  using Error::Error;
};

/// The selected coercivity strategy is not valid for the problem at hand.
class StrategyError : public Error {
public:
  using Error::Error;
};

} // namespace rbiga
