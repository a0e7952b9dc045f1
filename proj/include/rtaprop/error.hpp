#ifndef RTAPROP_ERROR_HPP_
#define RTAPROP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace rtaprop {

/// Malformed or out-of-contract input (files, configs, arguments).
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a valid result.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Query outside the domain a model is defined on (e.g. spline time range).
class DomainError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

} // namespace rtaprop

#endif // RTAPROP_ERROR_HPP_
