#pragma once

#include <stdexcept>
#include <string>

namespace fwas {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Face enumeration and subset scans refuse instances above the atom limit.
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

// All atoms coincide, so there is no proper face and no direction.
class DegenerateInstance : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Inconsistent solver constants, e.g. mu > L.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

}  // namespace fwas
