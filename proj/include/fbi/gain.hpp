/**
 * @file gain.hpp
 * @brief Feedback gain policies: unity, fixed, 1/(hL) and blockwise adaptive.
 */
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>

#include "fbi/integrate.hpp"
#include "fbi/lyapunov.hpp"
#include "fbi/system.hpp"

namespace fbi {

struct UnityGain {};

struct FixedGain {
  double alpha = 1.0;
};

/// alpha = 1 / (h L), resolved at run start.
struct InverseHLGain {
  double lipschitz = 1.0;
};

/// alpha = 1 / (c h max{||Hess V(x_k)||, H_min}), refreshed every ceil(T_update / h) steps.
struct AdaptiveGain {
  double c = 1.1;
  double h_min = 1e-10;
  double t_update = 0.1;
  HessianNorm norm = HessianNorm::Frobenius;
};

using GainPolicy = std::variant<UnityGain, FixedGain, InverseHLGain, AdaptiveGain>;

/// Throws ConfigError if the policy parameters are out of range.
void validate(const GainPolicy& policy);

[[nodiscard]] bool is_adaptive(const GainPolicy& policy) noexcept;

/// Short human-readable description, e.g. "inverse_hL(L=515.4)=1.9402...".
[[nodiscard]] std::string describe(const GainPolicy& policy, double h);

/// Unity -> 1, Fixed(a) -> a, InverseHL(L) -> 1/(hL). Adaptive is a ConfigError here.
[[nodiscard]] double resolve_fixed_gain(const GainPolicy& policy, double h);

struct AdaptiveGainValue {
  double hess_norm = 0.0;  ///< ||Hess V(x_k)||
  double bound = 0.0;      ///< B = max{hess_norm, H_min}
  double alpha = 0.0;      ///< A(x_k) = 1 / (c h B)
};

[[nodiscard]] AdaptiveGainValue adaptive_gain_detail(const LyapunovFunction& lyapunov,
                                                     std::span<const double> x, double h,
                                                     double c, double h_min,
                                                     HessianNorm norm = HessianNorm::Frobenius);

/// A(x_k) = 1 / (c h max{||Hess V(x_k)||_F, H_min}).
[[nodiscard]] double adaptive_gain(const LyapunovFunction& lyapunov, std::span<const double> x,
                                   double h, double c, double h_min);

/// Gain from a precomputed Hessian norm; shared by adaptive_gain and the driver.
[[nodiscard]] double adaptive_gain_from_norm(double hess_norm, double h, double c,
                                             double h_min) noexcept;

/// Smallest n >= T_update / h (quotients within a few ulps of an integer round to it).
[[nodiscard]] std::size_t block_length(double t_update, double h);

/// Per-run adaptive state; alpha is constant within a block.
struct GainState {
  double current_alpha = 0.0;
  std::size_t block_length = 1;
  std::size_t steps_into_block = 0;
};

struct LipschitzEstimate {
  double max_norm = 0.0;
  double min_norm = 0.0;
  std::size_t samples = 0;
  std::size_t stride = 1;
};

struct LipschitzProbeOptions {
  double h_probe = 1e-4;
  double window = 0.0;
  /// Steps between Hessian samples; 0 selects ceil(0.01 / h_probe).
  std::size_t stride = 0;
  HessianNorm norm = HessianNorm::Frobenius;
};

/**
 * @brief Maximum Hessian norm of V along a unity-gain feedback Euler run.
 *
 * Throws ConfigError for a nonpositive window or step, EstimationFailed if the
 * probe run diverges.
 */
[[nodiscard]] LipschitzEstimate estimate_lipschitz(const DynamicalSystem& system,
                                                   const LyapunovFunction& lyapunov,
                                                   std::span<const double> x0,
                                                   const LipschitzProbeOptions& options);

/**
 * @brief Feedback Euler with blockwise adaptive gain.
 *
 * The gain is recomputed from the current state whenever k mod n == 0 with
 * n = block_length(T_update, h), and held fixed for the following n steps.
 */
[[nodiscard]] IntegrationResult adaptive_driver(const DynamicalSystem& system,
                                                const LyapunovFunction& lyapunov,
                                                std::span<const double> x0,
                                                const AdaptiveGain& gain,
                                                const RunSettings& settings,
                                                std::span<const Observer> observers = {});

/**
 * @brief Runs a raw (no feedback) or feedback-augmented explicit method.
 *
 * With `gain` empty the plain field is integrated. Adaptive gain requires Euler;
 * pairing it with RK4 is a ConfigError.
 */
[[nodiscard]] IntegrationResult integrate(const DynamicalSystem& system,
                                          const LyapunovFunction& lyapunov, StepMethod method,
                                          const std::optional<GainPolicy>& gain,
                                          std::span<const double> x0, const RunSettings& settings,
                                          std::span<const Observer> observers = {});

}  // namespace fbi
