#pragma once

#include <stdexcept>
#include <string>

namespace parkcast {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Distribution or model parameters outside their domain.
class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// Truncation denominator not representable even in log space.
class DegenerateSupport : public Error {
 public:
  using Error::Error;
};

/// Malformed input row or value. Line 0 means "no line context".
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, long line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line(line) {}
  long line;
};

/// Timestamps not strictly increasing within a station.
class NonMonotonicTimestamps : public Error {
 public:
  NonMonotonicTimestamps(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  long line;
};

/// Occupancy count below zero on ingest.
class NegativeOccupancy : public Error {
 public:
  NegativeOccupancy(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  long line;
};

/// Profile cannot be normalised (all-equal or non-positive mass).
class DegenerateProfile : public Error {
 public:
  using Error::Error;
};

/// Too few profiles or samples for the requested operation.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Optimiser failed to produce a finite minimum from any start.
class OptimizerDiverged : public Error {
 public:
  using Error::Error;
};

/// Series lengths disagree where they must match.
class LengthMismatch : public Error {
 public:
  using Error::Error;
};

/// Conditioning window carries no usable signal (constant regressor).
class SingularFit : public Error {
 public:
  using Error::Error;
};

/// Bad CLI/config value outside the option domain.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Filesystem or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace parkcast
