#pragma once

#include <stdexcept>
#include <string>

namespace warden {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A record or request violated a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input bytes could not be decoded (bad header, bad field, duplicate key).
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Underlying file I/O failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The change source could not be reached.
class WarehouseUnavailable : public Error {
 public:
  using Error::Error;
};

/// Training data cannot produce a model (e.g. a single class).
class UntrainableData : public Error {
 public:
  using Error::Error;
};

/// A retrain was requested while another one was running.
class RetrainInProgress : public Error {
 public:
  RetrainInProgress() : Error("a retrain is already in progress") {}
};

}  // namespace warden
