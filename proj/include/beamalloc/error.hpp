#pragma once

#include <stdexcept>
#include <string>

namespace beamalloc {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Raised by make_zf when the Gram matrix exceeds the conditioning cap.
class PrecoderSingular : public Error {
 public:
  using Error::Error;
};

/// A user whose effective gain |h_k^H w_k|^2 is zero.
class DegenerateChannel : public Error {
 public:
  using Error::Error;
};

class AttenuationOverflow : public Error {
 public:
  using Error::Error;
};

/// A metric that has no value for the given input (all-zero Jain, zero SumOpt rate).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace beamalloc
