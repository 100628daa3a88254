/**
 * @file lyapunov.hpp
 * @brief Sums-of-squares Lyapunov functions built from first integrals.
 *
 * V(x) = sum_j (k_j / 2) |F_j(x) - F_j(x_I)|^2 + P(x), where P is an optional
 * constraint penalty vanishing on the manifold. V is zero exactly on the set
 * where every integral equals its reference value and the penalty vanishes.
 */
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbi/system.hpp"

namespace fbi {

struct WeightedIntegral {
  FirstIntegral integral;
  double weight = 1.0;
};

/// Additive penalty term with its gradient. `add_gradient` accumulates into `grad`.
struct Penalty {
  std::string name;
  std::function<double(std::span<const double> x)> value;
  std::function<void(std::span<const double> x, std::span<double> grad)> add_gradient;
};

enum class HessianNorm { Frobenius, Spectral };

class LyapunovFunction {
 public:
  LyapunovFunction(std::size_t dim, std::vector<WeightedIntegral> terms,
                   std::vector<std::vector<double>> reference,
                   std::optional<Penalty> penalty);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

  [[nodiscard]] double value(std::span<const double> x) const;

  void gradient(std::span<const double> x, std::span<double> grad) const;
  [[nodiscard]] State gradient(std::span<const double> x) const;

  /// Norm of the finite-difference Hessian (see finite_difference_hessian).
  [[nodiscard]] double hess_norm(std::span<const double> x,
                                 HessianNorm kind = HessianNorm::Frobenius) const;

  [[nodiscard]] const std::vector<WeightedIntegral>& terms() const noexcept { return terms_; }
  [[nodiscard]] const std::vector<std::vector<double>>& reference() const noexcept {
    return reference_;
  }
  [[nodiscard]] const std::optional<Penalty>& penalty() const noexcept { return penalty_; }

 private:
  std::size_t dim_;
  std::vector<WeightedIntegral> terms_;
  std::vector<std::vector<double>> reference_;
  std::optional<Penalty> penalty_;
  std::size_t max_term_size_ = 0;
};

/**
 * @brief Builds V from weighted integrals, taking reference values at `x_initial`.
 *
 * Throws ConfigError on a nonpositive weight or a dimension mismatch.
 */
[[nodiscard]] LyapunovFunction build_sos_lyapunov(std::size_t dim,
                                                  std::vector<WeightedIntegral> terms,
                                                  std::span<const double> x_initial,
                                                  std::optional<Penalty> penalty = std::nullopt);

struct OrthogonalityTerm {
  double value = 0.0;
  std::array<double, 9> gradient{};
};

/// (k0/4) ||R^T R - I||_F^2 and its gradient k0 R (R^T R - I), R row-major.
[[nodiscard]] OrthogonalityTerm orthogonality_penalty(std::span<const double, 9> rotation,
                                                      double k0);

/// Orthogonality penalty on the 9 entries starting at `offset` of the state.
[[nodiscard]] Penalty orthogonality_penalty(std::size_t offset, double k0);

/// Per-coordinate central-difference step: cbrt(eps) * max(1, |x_i|).
[[nodiscard]] double fd_step(double xi) noexcept;

/**
 * @brief Raw finite-difference Hessian, n x n row-major, not symmetrized.
 *
 * Column i is (grad V(x + d_i e_i) - grad V(x - d_i e_i)) / (2 d_i).
 * Throws HessianEvaluationError if any entry is non-finite.
 */
[[nodiscard]] std::vector<double> finite_difference_hessian(const LyapunovFunction& lyapunov,
                                                            std::span<const double> x);

/// Central-difference gradient of V.value, used as an independent check of V.gradient.
[[nodiscard]] State finite_difference_gradient(const LyapunovFunction& lyapunov,
                                               std::span<const double> x);

[[nodiscard]] std::vector<double> symmetrized(std::span<const double> matrix, std::size_t n);

[[nodiscard]] double frobenius_norm(std::span<const double> matrix) noexcept;

/// Largest singular value estimate by power iteration (a lower bound on the 2-norm).
[[nodiscard]] double spectral_norm_power(std::span<const double> matrix, std::size_t n,
                                         int iterations = 50);

[[nodiscard]] double hess_norm_frobenius(const LyapunovFunction& lyapunov,
                                         std::span<const double> x);

[[nodiscard]] double hess_norm_spectral(const LyapunovFunction& lyapunov,
                                        std::span<const double> x);

}  // namespace fbi
