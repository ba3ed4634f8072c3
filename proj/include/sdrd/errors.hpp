#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sdrd {

// A declared structural constant or bound was violated at runtime
// (delay outside [0,r], projection ratio above its admissible bound, ...).
class SpecViolation : public std::runtime_error {
 public:
  explicit SpecViolation(const std::string& what) : std::runtime_error(what) {}
};

// A caller-side contract was not met (q below the critical exponent,
// too few runs in a family, step size too coarse for the delay window).
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// History queried outside its covered span; signals a setup bug.
class OutOfWindowError : public std::runtime_error {
 public:
  explicit OutOfWindowError(const std::string& what) : std::runtime_error(what) {}
};

// A run terminated blowup-suspected where a completed trajectory was required.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Configuration parse/validation failure; carries every violation found.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::vector<std::string> violations)
      : std::runtime_error(what), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace sdrd
