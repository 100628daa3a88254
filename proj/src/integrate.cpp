#include "fbi/integrate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "fbi/errors.hpp"

namespace fbi {

void Trajectory::push(double t, std::span<const double> x) {
  times_.push_back(t);
  data_.insert(data_.end(), x.begin(), x.end());
}

std::span<const double> Trajectory::state(std::size_t i) const {
  return std::span<const double>(data_).subspan(i * dim_, dim_);
}

double RunRecord::max_deviation() const noexcept {
  double m = 0.0;
  for (const auto& d : deviations) m = std::max(m, d.max_deviation);
  return m;
}

double RunRecord::deviation(std::string_view name) const {
  for (const auto& d : deviations) {
    if (d.name == name) return d.max_deviation;
  }
  throw std::out_of_range("no deviation named " + std::string(name));
}

std::size_t step_count(double t_end, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("step size must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be nonnegative");
  const double q = t_end / h;
  if (q >= static_cast<double>(std::numeric_limits<std::size_t>::max() / 2)) {
    throw ConfigError("step count does not fit the step counter");
  }
  const double nearest = std::round(q);
  if (std::abs(q - nearest) <= 4.0 * std::numeric_limits<double>::epsilon() * nearest) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(q));
}

std::size_t default_stride(std::size_t steps) noexcept {
  constexpr std::size_t kEveryStepLimit = 1000;
  constexpr std::size_t kMaxStored = 1000000;
  if (steps <= kEveryStepLimit) return 1;
  return std::max<std::size_t>(1, (steps + kMaxStored - 1) / kMaxStored);
}

namespace {

struct MonitorTrack {
  Monitor monitor;
  std::vector<double> initial;
  std::vector<double> scratch;
  double max_deviation = 0.0;

  void update(std::span<const double> x) {
    monitor.value(x, scratch);
    double sq = 0.0;
    for (std::size_t i = 0; i < scratch.size(); ++i) {
      const double d = scratch[i] - initial[i];
      sq += d * d;
    }
    max_deviation = std::max(max_deviation, std::sqrt(sq));
  }
};

}  // namespace

IntegrationResult drive(const DynamicalSystem& system, const LyapunovFunction& lyapunov,
                        const StepMap& step, std::span<const double> x0,
                        const RunSettings& settings, std::span<const Observer> observers) {
  const std::size_t n = system.dim();
  if (x0.size() != n) throw ConfigError("initial state has wrong dimension");
  if (!all_finite(x0)) throw ConfigError("initial state is not finite");
  if (!system.in_domain(x0)) throw ConfigError("initial state is outside the domain");
  const std::size_t steps = step_count(settings.t_end, settings.h);
  const std::size_t stride = settings.stride.value_or(default_stride(steps));
  if (stride == 0) throw ConfigError("storage stride must be positive");

  IntegrationResult result{Trajectory(n, stride), RunRecord{}};
  RunRecord& record = result.record;

  std::vector<MonitorTrack> tracks;
  for (auto& m : system.monitors()) {
    MonitorTrack t{m, std::vector<double>(m.size), std::vector<double>(m.size)};
    t.monitor.value(x0, t.initial);
    tracks.push_back(std::move(t));
  }

  State x(x0.begin(), x0.end());
  result.trajectory.push(0.0, x);
  record.max_value = lyapunov.value(x);

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < steps; ++k) {
    StepReport report;
    std::string reason;
    try {
      report = step(x, settings.h, k);
    } catch (const DomainExit& e) {
      reason = std::string("domain exit: ") + e.what();
    } catch (const DivergedState& e) {
      reason = e.what();
    } catch (const HessianEvaluationError& e) {
      reason = std::string("hessian: ") + e.what();
    }
    double v = 0.0;
    if (reason.empty()) {
      if (!all_finite(x)) {
        reason = "non-finite state";
      } else {
        try {
          v = lyapunov.value(x);
        } catch (const DomainExit& e) {
          reason = std::string("domain exit: ") + e.what();
        }
        if (reason.empty() && !(v <= settings.divergence_threshold)) {
          reason = "V above divergence threshold";
        }
      }
    }
    if (!reason.empty()) {
      record.diverged = true;
      record.divergence_step = k + 1;
      record.divergence_reason = reason;
      record.steps = k;
      break;
    }

    record.max_value = std::max(record.max_value, v);
    for (auto& t : tracks) t.update(x);
    const double t = static_cast<double>(k + 1) * settings.h;
    if ((k + 1) % stride == 0) result.trajectory.push(t, x);
    if (!observers.empty()) {
      const StepInfo info{k + 1, t, x, v, report};
      for (const auto& obs : observers) obs(info);
    }
    record.steps = k + 1;
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const auto& t : tracks) record.deviations.push_back({t.monitor.name, t.max_deviation});
  return result;
}

}  // namespace fbi
