#pragma once

#include <stdexcept>
#include <string>

namespace cqdyn {

// base class for everything thrown by this library
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NotHermitianError : public Error {
 public:
  NotHermitianError(const std::string& what, double defect)
      : Error(what), defect(defect) {}
  double defect;
};

// the constraint has no null vector within tolerance and auto-shift was off
class NoPhysicalStateError : public Error {
 public:
  NoPhysicalStateError(const std::string& what, double nearest)
      : Error(what), nearest_eigenvalue(nearest) {}
  double nearest_eigenvalue;
};

class PicardDivergenceError : public Error {
 public:
  PicardDivergenceError(const std::string& what, double ratio, int iters)
      : Error(what), last_ratio(ratio), iterations(iters) {}
  double last_ratio;
  int iterations;
};

// config parse / validation failure; `field` is a JSON-pointer-like path
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field(field) {}
  std::string field;
};

}  // namespace cqdyn
