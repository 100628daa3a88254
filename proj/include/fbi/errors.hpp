/**
 * @file errors.hpp
 * @brief Exception types raised by the integrators, gain policies and harness.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbi {

/** @brief Invalid configuration detected before any stepping happens. */
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/** @brief A state left the open domain U of the system (e.g. Kepler collision, det R <= 0). */
class DomainExit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** @brief A step produced a non-finite state or V exceeded the divergence threshold. */
class DivergedState : public std::runtime_error {
 public:
  DivergedState(const std::string& what, std::size_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

  [[nodiscard]] std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/** @brief Finite-difference Hessian produced a non-finite entry. */
class HessianEvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** @brief Lipschitz probe run diverged; carries the largest Hessian norm seen before. */
class EstimationFailed : public std::runtime_error {
 public:
  EstimationFailed(const std::string& what, double partial_max)
      : std::runtime_error(what), partial_max_(partial_max) {}

  [[nodiscard]] double partial_max() const noexcept { return partial_max_; }

 private:
  double partial_max_;
};

}  // namespace fbi
