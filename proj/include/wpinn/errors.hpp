#pragma once

#include <stdexcept>
#include <string>

namespace wpinn {

// Invalid user-facing configuration (widths, presets, config keys).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (point off a boundary, x outside
// the domain, mismatched shapes).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite loss or gradient during training.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SequenceExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wpinn
