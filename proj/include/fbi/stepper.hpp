/**
 * @file stepper.hpp
 * @brief Explicit one-step methods and the feedback-augmented (surrogate) field.
 */
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fbi/lyapunov.hpp"
#include "fbi/system.hpp"

namespace fbi {

enum class StepMethod { Euler, RK4 };

[[nodiscard]] std::string_view to_string(StepMethod method) noexcept;

/**
 * @brief Reusable explicit stepper with per-run scratch storage.
 *
 * `step` advances x in place by one step of size h. The instance owns mutable
 * scratch buffers and must not be shared between concurrent runs.
 */
class ExplicitStepper {
 public:
  ExplicitStepper(StepMethod method, std::size_t dim);

  void step(const VectorField& field, std::span<double> x, double h);

  [[nodiscard]] StepMethod method() const noexcept { return method_; }

 private:
  StepMethod method_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// x + h Y(x). Throws DivergedState (carrying `step_index`) on a non-finite result.
[[nodiscard]] State euler_step(const VectorField& field, std::span<const double> x, double h,
                               std::size_t step_index = 0);

/// Classical four-stage Runge-Kutta step. Throws DivergedState on a non-finite result.
[[nodiscard]] State rk4_step(const VectorField& field, std::span<const double> x, double h,
                             std::size_t step_index = 0);

/**
 * @brief Y(x) = f(x) - alpha grad V(x).
 *
 * The returned field references `system` and `lyapunov`; both must outlive it.
 * With alpha == 0 the raw field is returned unchanged.
 */
[[nodiscard]] VectorField surrogate_field(const DynamicalSystem& system,
                                          const LyapunovFunction& lyapunov, double alpha);

}  // namespace fbi
