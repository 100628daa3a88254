/**
 * @file problems.hpp
 * @brief Benchmark systems: free rigid body, Kepler, perturbed Kepler.
 *
 * State layouts:
 *   rigid_body        R row-major (entries 0-8), Omega (9-11), dim 12
 *   kepler, perturbed x (0-2), v (3-5), dim 6
 */
#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbi/lyapunov.hpp"
#include "fbi/system.hpp"

namespace fbi {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

[[nodiscard]] Vec3 cross(const Vec3& a, const Vec3& b) noexcept;

/// Skew matrix with hat(a) b = a x b.
[[nodiscard]] Mat3 hat(const Vec3& a) noexcept;

[[nodiscard]] double det3(std::span<const double, 9> m) noexcept;

/// R' = R hat(Omega), Omega' = I^-1 ((I Omega) x Omega) on det R > 0.
class RigidBodySystem final : public DynamicalSystem {
 public:
  static constexpr std::size_t kDim = 12;

  explicit RigidBodySystem(const Vec3& inertia = {3.0, 2.0, 1.0});

  [[nodiscard]] std::size_t dim() const override { return kDim; }
  using DynamicalSystem::field;
  void field(std::span<const double> x, std::span<double> dxdt) const override;
  [[nodiscard]] bool in_domain(std::span<const double> x) const override;
  [[nodiscard]] const std::vector<FirstIntegral>& integrals() const override { return integrals_; }
  /// E, pi, and the orthogonality residual R^T R - I.
  [[nodiscard]] std::vector<Monitor> monitors() const override;

  [[nodiscard]] const Vec3& inertia() const noexcept { return inertia_; }

  /// E = Omega^T I Omega / 2.
  [[nodiscard]] double energy(std::span<const double> x) const;
  /// pi = R I Omega.
  [[nodiscard]] Vec3 spatial_momentum(std::span<const double> x) const;

 private:
  Vec3 inertia_;
  std::vector<FirstIntegral> integrals_;
};

/**
 * @brief x' = v, v' = -U'(|x|) x / |x| with U(r) = -mu/r - delta/r^3.
 *
 * delta = 0 is the Kepler problem. |x| below kCollisionRadius is a DomainExit.
 */
class CentralForceSystem : public DynamicalSystem {
 public:
  static constexpr std::size_t kDim = 6;
  static constexpr double kCollisionRadius = 1e-12;

  CentralForceSystem(double mu, double delta);

  [[nodiscard]] std::size_t dim() const override { return kDim; }
  using DynamicalSystem::field;
  void field(std::span<const double> x, std::span<double> dxdt) const override;
  [[nodiscard]] bool in_domain(std::span<const double> x) const override;

  /// v' as a function of position only (used by Stormer-Verlet).
  void acceleration(std::span<const double, 3> position, std::span<double, 3> accel) const;

  [[nodiscard]] double mu() const noexcept { return mu_; }
  [[nodiscard]] double delta() const noexcept { return delta_; }

  /// U(r) = -mu/r - delta/r^3.
  [[nodiscard]] double potential(double r) const noexcept;
  /// |v|^2/2 + U(|x|).
  [[nodiscard]] double energy(std::span<const double> x) const;

 protected:
  double mu_;
  double delta_;
};

/// Kepler problem with integrals L = x cross v and the Laplace-Runge-Lenz vector A.
class KeplerSystem final : public CentralForceSystem {
 public:
  explicit KeplerSystem(double mu = 1.0);
  [[nodiscard]] const std::vector<FirstIntegral>& integrals() const override { return integrals_; }

 private:
  std::vector<FirstIntegral> integrals_;
};

/// Perturbed Kepler problem with integrals E and L.
class PerturbedKeplerSystem final : public CentralForceSystem {
 public:
  explicit PerturbedKeplerSystem(double mu = 1.0, double delta = 0.0025);
  [[nodiscard]] const std::vector<FirstIntegral>& integrals() const override { return integrals_; }

 private:
  std::vector<FirstIntegral> integrals_;
};

[[nodiscard]] State rigid_body_field(std::span<const double> x,
                                     const Vec3& inertia = {3.0, 2.0, 1.0});
[[nodiscard]] State kepler_field(std::span<const double> x, double mu = 1.0);
[[nodiscard]] State perturbed_kepler_field(std::span<const double> x, double mu = 1.0,
                                           double delta = 0.0025);

/// L = x cross v.
[[nodiscard]] Vec3 angular_momentum(std::span<const double> x);
/// A = v x (x x v) - mu x / |x|.
[[nodiscard]] Vec3 laplace_runge_lenz(std::span<const double> x, double mu = 1.0);

/// A benchmark problem with its Lyapunov function and reference settings.
struct Problem {
  std::string name;
  std::shared_ptr<const DynamicalSystem> system;
  LyapunovFunction lyapunov;
  State initial_state;
  double lipschitz = 0.0;      ///< reference estimate of sup ||Hess V||
  double t_update = 0.1;       ///< adaptive gain update period
  double horizon = 0.0;        ///< full-scale integration horizon
  double desk_horizon = 0.0;   ///< default horizon for desk-scale runs
  std::optional<double> period;
  double probe_window = 0.0;   ///< window for the Lipschitz probe
};

struct RigidBodyWeights {
  double orthogonality = 50.0;
  double energy = 100.0;
  double momentum = 50.0;
};

struct KeplerWeights {
  double angular_momentum = 4.0;
  double lrl = 2.0;
};

struct PerturbedKeplerWeights {
  double energy = 3.0;
  double angular_momentum = 2.0;
};

inline constexpr double kKeplerPeriod = 70.2481;

[[nodiscard]] Problem make_rigid_body(const RigidBodyWeights& weights = {});
[[nodiscard]] Problem make_kepler(const KeplerWeights& weights = {});
[[nodiscard]] Problem make_perturbed_kepler(const PerturbedKeplerWeights& weights = {});

/// rigid_body | kepler | perturbed_kepler; anything else is a ConfigError.
[[nodiscard]] Problem make_problem(std::string_view name);

[[nodiscard]] const std::vector<std::string>& problem_names();

}  // namespace fbi
