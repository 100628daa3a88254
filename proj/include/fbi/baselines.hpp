/**
 * @file baselines.hpp
 * @brief Structure-preserving reference methods: Strang splitting (rigid body)
 *        and Stormer-Verlet (Kepler family).
 */
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>

#include "fbi/problems.hpp"
#include "fbi/system.hpp"

namespace fbi {

/// Palindromic axis sequence with the fraction of h each sub-flow runs for.
struct SplittingScheme {
  std::array<int, 5> axes{0, 1, 2, 1, 0};
  std::array<double, 5> fractions{0.5, 0.5, 1.0, 0.5, 0.5};

  [[nodiscard]] bool is_symmetric() const noexcept;
};

/**
 * @brief Exact flow of H_i = pi_i^2 / (2 I_i) for time t, in place.
 *
 * pi = I Omega is rotated about e_i by -omega t with omega = pi_i / I_i, and R
 * is post-multiplied by the rotation about e_i by +omega t.
 */
void rigid_body_axis_flow(std::span<double> x, int axis, double t, const Vec3& inertia);

/// Strang composition of the axis flows over one step h.
void strang_splitting_step(std::span<double> x, double h, const Vec3& inertia,
                           const SplittingScheme& scheme = {});

using Acceleration = std::function<void(std::span<const double, 3>, std::span<double, 3>)>;

/// Kick-drift-kick on the (x, v) layout, in place. Errors from `accel` propagate.
void stormer_verlet_step(std::span<double> x, double h, const Acceleration& accel);

}  // namespace fbi
