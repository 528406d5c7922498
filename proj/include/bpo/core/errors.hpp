#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bpo {

/// Invalid configuration or model specification. Raised at construction time.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// The evidence has zero total likelihood under every latent hypothesis.
class ZeroLikelihood : public std::runtime_error {
 public:
  explicit ZeroLikelihood(const std::string& what) : std::runtime_error(what) {}
};

/// Bad numeric input to a filter (non-finite observation, degenerate variance).
class FilterError : public std::runtime_error {
 public:
  explicit FilterError(const std::string& what) : std::runtime_error(what) {}
};

/// A rollout aborted; carries the step index at which it failed.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::size_t step, const std::string& what)
      : std::runtime_error("simulation failed at step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace bpo
