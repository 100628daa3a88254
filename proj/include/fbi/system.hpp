/**
 * @file system.hpp
 * @brief State representation and the dynamical-system interface.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fbi {

/// Embedded state in R^n.
using State = std::vector<double>;

/// In-place vector field: writes dx/dt for state x into `dxdt` (same length as x).
using VectorField = std::function<void(std::span<const double> x, std::span<double> dxdt)>;

/**
 * @brief A (possibly vector-valued) first integral F: R^n -> R^m with its Jacobian.
 *
 * The Jacobian is written row-major, m rows by n columns.
 */
struct FirstIntegral {
  std::string name;
  std::size_t size = 1;
  std::function<void(std::span<const double> x, std::span<double> value)> value;
  std::function<void(std::span<const double> x, std::span<double> jacobian)> jacobian;

  [[nodiscard]] std::vector<double> eval(std::span<const double> x) const {
    std::vector<double> out(size);
    value(x, out);
    return out;
  }
};

/// A monitored quantity whose drift from its initial value is reported per run.
struct Monitor {
  std::string name;
  std::size_t size = 1;
  std::function<void(std::span<const double> x, std::span<double> value)> value;
};

/**
 * @brief ODE x' = f(x) on an open set U of R^n admitting first integrals.
 *
 * Implementations are immutable after construction and safe to share between
 * concurrent runs.
 */
class DynamicalSystem {
 public:
  virtual ~DynamicalSystem() = default;

  [[nodiscard]] virtual std::size_t dim() const = 0;

  /// Extended vector field. Throws DomainExit outside U.
  virtual void field(std::span<const double> x, std::span<double> dxdt) const = 0;

  [[nodiscard]] virtual bool in_domain(std::span<const double> x) const = 0;

  [[nodiscard]] virtual const std::vector<FirstIntegral>& integrals() const = 0;

  /// Quantities whose deviation is tracked in run records. Defaults to the integrals.
  [[nodiscard]] virtual std::vector<Monitor> monitors() const;

  [[nodiscard]] State field(std::span<const double> x) const {
    State out(dim());
    field(x, out);
    return out;
  }

  /// The raw field as a VectorField bound to this system (the system must outlive it).
  [[nodiscard]] VectorField as_field() const;
};

[[nodiscard]] bool all_finite(std::span<const double> x) noexcept;

[[nodiscard]] double norm2(std::span<const double> x) noexcept;

[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace fbi
