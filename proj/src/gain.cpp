#include "fbi/gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fbi/errors.hpp"

namespace fbi {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void validate(const GainPolicy& policy) {
  std::visit(overloaded{
                 [](const UnityGain&) {},
                 [](const FixedGain& g) {
                   if (!positive_finite(g.alpha)) throw ConfigError("fixed gain alpha must be > 0");
                 },
                 [](const InverseHLGain& g) {
                   if (!positive_finite(g.lipschitz)) {
                     throw ConfigError("Lipschitz constant L must be > 0");
                   }
                 },
                 [](const AdaptiveGain& g) {
                   if (!(g.c > 1.0) || !std::isfinite(g.c)) {
                     throw ConfigError("adaptive scale c must be > 1");
                   }
                   if (!positive_finite(g.h_min)) throw ConfigError("adaptive H_min must be > 0");
                   if (!positive_finite(g.t_update)) {
                     throw ConfigError("adaptive T_update must be > 0");
                   }
                 },
             },
             policy);
}

bool is_adaptive(const GainPolicy& policy) noexcept {
  return std::holds_alternative<AdaptiveGain>(policy);
}

std::string describe(const GainPolicy& policy, double h) {
  return std::visit(overloaded{
                        [](const UnityGain&) { return std::string("unity"); },
                        [](const FixedGain& g) { return "fixed(" + fmt(g.alpha) + ")"; },
                        [h](const InverseHLGain& g) {
                          return "inverse_hL(L=" + fmt(g.lipschitz) + ")=" +
                                 fmt(1.0 / (h * g.lipschitz));
                        },
                        [](const AdaptiveGain& g) {
                          return "adaptive(c=" + fmt(g.c) + ";H_min=" + fmt(g.h_min) +
                                 ";T_update=" + fmt(g.t_update) + ")";
                        },
                    },
                    policy);
}

double resolve_fixed_gain(const GainPolicy& policy, double h) {
  if (!positive_finite(h)) throw ConfigError("step size must be positive");
  validate(policy);
  return std::visit(overloaded{
                        [](const UnityGain&) { return 1.0; },
                        [](const FixedGain& g) { return g.alpha; },
                        [h](const InverseHLGain& g) { return 1.0 / (h * g.lipschitz); },
                        [](const AdaptiveGain&) -> double {
                          throw ConfigError("adaptive gain requires the blockwise driver");
                        },
                    },
                    policy);
}

double adaptive_gain_from_norm(double hess_norm, double h, double c, double h_min) noexcept {
  const double bound = std::max(hess_norm, h_min);
  return 1.0 / (c * h * bound);
}

AdaptiveGainValue adaptive_gain_detail(const LyapunovFunction& lyapunov,
                                       std::span<const double> x, double h, double c,
                                       double h_min, HessianNorm norm) {
  AdaptiveGainValue out;
  out.hess_norm = lyapunov.hess_norm(x, norm);
  out.bound = std::max(out.hess_norm, h_min);
  out.alpha = adaptive_gain_from_norm(out.hess_norm, h, c, h_min);
  return out;
}

double adaptive_gain(const LyapunovFunction& lyapunov, std::span<const double> x, double h,
                     double c, double h_min) {
  return adaptive_gain_detail(lyapunov, x, h, c, h_min).alpha;
}

std::size_t block_length(double t_update, double h) {
  if (!positive_finite(t_update) || !positive_finite(h)) {
    throw ConfigError("T_update and h must be positive");
  }
  return std::max<std::size_t>(1, step_count(t_update, h));
}

LipschitzEstimate estimate_lipschitz(const DynamicalSystem& system,
                                     const LyapunovFunction& lyapunov,
                                     std::span<const double> x0,
                                     const LipschitzProbeOptions& options) {
  if (!positive_finite(options.window)) throw ConfigError("probe window must be positive");
  if (!positive_finite(options.h_probe)) throw ConfigError("probe step must be positive");

  LipschitzEstimate est;
  est.stride = options.stride != 0
                   ? options.stride
                   : static_cast<std::size_t>(std::ceil(1e-2 / options.h_probe));
  est.min_norm = std::numeric_limits<double>::infinity();
  auto sample = [&](std::span<const double> x) {
    const double norm = lyapunov.hess_norm(x, options.norm);
    est.max_norm = std::max(est.max_norm, norm);
    est.min_norm = std::min(est.min_norm, norm);
    ++est.samples;
  };
  sample(x0);

  const Observer observer = [&](const StepInfo& info) {
    if (info.step % est.stride == 0) sample(info.x);
  };
  RunSettings settings;
  settings.h = options.h_probe;
  settings.t_end = options.window;
  settings.stride = std::numeric_limits<std::size_t>::max();
  const auto result =
      integrate(system, lyapunov, StepMethod::Euler, GainPolicy{UnityGain{}}, x0, settings,
                std::span<const Observer>(&observer, 1));
  if (result.record.diverged) {
    throw EstimationFailed("Lipschitz probe diverged: " + result.record.divergence_reason,
                           est.max_norm);
  }
  return est;
}

IntegrationResult adaptive_driver(const DynamicalSystem& system,
                                  const LyapunovFunction& lyapunov, std::span<const double> x0,
                                  const AdaptiveGain& gain, const RunSettings& settings,
                                  std::span<const Observer> observers) {
  validate(GainPolicy{gain});
  GainState state;
  state.block_length = block_length(gain.t_update, settings.h);

  ExplicitStepper stepper(StepMethod::Euler, system.dim());
  VectorField field;
  const StepMap step = [&](std::span<double> x, double h, std::size_t k) {
    StepReport report;
    if (k % state.block_length == 0) {
      const auto value = adaptive_gain_detail(lyapunov, x, h, gain.c, gain.h_min, gain.norm);
      state.current_alpha = value.alpha;
      state.steps_into_block = 0;
      field = surrogate_field(system, lyapunov, state.current_alpha);
      report.gain_updated = true;
      report.hess_norm = value.hess_norm;
    }
    stepper.step(field, x, h);
    state.steps_into_block = (state.steps_into_block + 1) % state.block_length;
    report.alpha = state.current_alpha;
    return report;
  };
  auto result = drive(system, lyapunov, step, x0, settings, observers);
  result.record.alpha_desc = describe(GainPolicy{gain}, settings.h);
  return result;
}

IntegrationResult integrate(const DynamicalSystem& system, const LyapunovFunction& lyapunov,
                            StepMethod method, const std::optional<GainPolicy>& gain,
                            std::span<const double> x0, const RunSettings& settings,
                            std::span<const Observer> observers) {
  if (gain && is_adaptive(*gain)) {
    if (method != StepMethod::Euler) {
      throw ConfigError("adaptive gain is only defined for the Euler stepper");
    }
    return adaptive_driver(system, lyapunov, x0, std::get<AdaptiveGain>(*gain), settings,
                           observers);
  }
  const double alpha = gain ? resolve_fixed_gain(*gain, settings.h) : 0.0;
  const VectorField field =
      gain ? surrogate_field(system, lyapunov, alpha) : system.as_field();
  ExplicitStepper stepper(method, system.dim());
  const StepMap step = [&](std::span<double> x, double h, std::size_t) {
    stepper.step(field, x, h);
    return StepReport{alpha, false, std::numeric_limits<double>::quiet_NaN()};
  };
  auto result = drive(system, lyapunov, step, x0, settings, observers);
  result.record.alpha_desc = gain ? describe(*gain, settings.h) : "none";
  return result;
}

}  // namespace fbi
