#pragma once

#include <stdexcept>
#include <string>

namespace nmor {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The gain function G (or its inverse) was requested with a vanishing
/// denominator, i.e. one probe lost a circular component while the other
/// probe is still present.
class SingularGainError : public Error {
 public:
  using Error::Error;
};

/// An adaptive integration could not make progress (step-size underflow).
class StepSizeError : public Error {
 public:
  StepSizeError(const std::string& what, double position)
      : Error(what), position_(position) {}
  double position() const noexcept { return position_; }

 private:
  double position_;
};

/// The counter-propagating relaxation did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Invalid configuration value or syntax. key() names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace nmor
