/**
 * @file integrate.hpp
 * @brief Fixed-step trajectory driver with divergence detection and run metrics.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbi/lyapunov.hpp"
#include "fbi/stepper.hpp"
#include "fbi/system.hpp"

namespace fbi {

/// Runs halt once V(x_k) exceeds this value.
inline constexpr double kDivergenceThreshold = 1e6;

struct RunSettings {
  double h = 1e-3;
  double t_end = 0.0;
  /// Trajectory storage stride; empty selects the default (see default_stride).
  std::optional<std::size_t> stride;
  double divergence_threshold = kDivergenceThreshold;
};

/// What one step did; reported to observers.
struct StepReport {
  double alpha = 0.0;
  bool gain_updated = false;
  double hess_norm = std::numeric_limits<double>::quiet_NaN();
};

struct StepInfo {
  std::size_t step = 0;  ///< steps completed; x is x_step
  double t = 0.0;
  std::span<const double> x;
  double value = 0.0;  ///< V(x)
  StepReport report;
};

/// Pure accumulator invoked synchronously after every step.
using Observer = std::function<void(const StepInfo&)>;

/// Advances x in place by one step of size h from step index k.
using StepMap = std::function<StepReport(std::span<double> x, double h, std::size_t k)>;

class Trajectory {
 public:
  Trajectory(std::size_t dim, std::size_t stride) : dim_(dim), stride_(stride) {}

  void push(double t, std::span<const double> x);

  [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t stride() const noexcept { return stride_; }
  [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
  [[nodiscard]] std::span<const double> state(std::size_t i) const;
  [[nodiscard]] std::span<const double> back() const { return state(size() - 1); }

 private:
  std::size_t dim_;
  std::size_t stride_;
  std::vector<double> times_;
  std::vector<double> data_;
};

struct Deviation {
  std::string name;
  double max_deviation = 0.0;
};

struct RunRecord {
  std::string alpha_desc;
  double max_value = 0.0;
  std::vector<Deviation> deviations;
  std::size_t steps = 0;
  double wall_seconds = 0.0;
  bool diverged = false;
  std::optional<std::size_t> divergence_step;
  std::string divergence_reason;

  [[nodiscard]] double max_deviation() const noexcept;
  [[nodiscard]] double deviation(std::string_view name) const;
};

struct IntegrationResult {
  Trajectory trajectory;
  RunRecord record;
};

/// N = ceil(t_end / h), with quotients within a few ulps of an integer taken as exact.
[[nodiscard]] std::size_t step_count(double t_end, double h);

/// Stride 1 up to 1000 steps, otherwise the smallest stride keeping <= 1e6 stored states.
[[nodiscard]] std::size_t default_stride(std::size_t steps) noexcept;

/**
 * @brief Generic fixed-step loop.
 *
 * Advances N = step_count(t_end, h) steps with `step`, tracking max V and the
 * drift of every monitor of `system` at every step. A non-finite state, V above
 * the divergence threshold, or a DomainExit halts the run and flags the record;
 * the stored trajectory then ends at the last good state.
 */
[[nodiscard]] IntegrationResult drive(const DynamicalSystem& system,
                                      const LyapunovFunction& lyapunov, const StepMap& step,
                                      std::span<const double> x0, const RunSettings& settings,
                                      std::span<const Observer> observers = {});

}  // namespace fbi
