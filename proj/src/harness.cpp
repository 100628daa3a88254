#include "fbi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <thread>

#include "fbi/baselines.hpp"
#include "fbi/errors.hpp"

namespace fbi {

namespace {

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr MethodName kMethods[] = {
    {Method::Euler, "euler"},
    {Method::RK4, "rk4"},
    {Method::FeedbackEuler, "feedback_euler"},
    {Method::FeedbackRK4, "feedback_rk4"},
    {Method::AdaptiveFeedback, "adaptive_feedback"},
    {Method::StrangSplitting, "strang_splitting"},
    {Method::StormerVerlet, "stormer_verlet"},
};

bool is_kepler_family(std::string_view problem) {
  return problem == "kepler" || problem == "perturbed_kepler";
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  for (const auto& m : kMethods) {
    if (m.method == method) return m.name;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto& m : kMethods) {
    if (m.name == name) return m.method;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

bool uses_feedback(Method method) noexcept {
  return method == Method::FeedbackEuler || method == Method::FeedbackRK4 ||
         method == Method::AdaptiveFeedback;
}

std::string_view to_string(GainKind kind) noexcept {
  switch (kind) {
    case GainKind::Unity:
      return "unity";
    case GainKind::Fixed:
      return "fixed";
    case GainKind::InverseHL:
      return "inverse_hl";
    case GainKind::Adaptive:
      return "adaptive";
  }
  return "unknown";
}

GainKind parse_gain(std::string_view name) {
  if (name == "unity") return GainKind::Unity;
  if (name == "fixed") return GainKind::Fixed;
  if (name == "inverse_hl" || name == "inverse-hl" || name == "inverse_hL") {
    return GainKind::InverseHL;
  }
  if (name == "adaptive") return GainKind::Adaptive;
  throw ConfigError("unknown gain '" + std::string(name) + "'");
}

std::vector<double> decade_grid(double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw ConfigError("h range must satisfy 0 < lo <= hi");
  }
  if (points_per_decade < 1) throw ConfigError("points per decade must be >= 1");
  const double p = points_per_decade;
  const long first = std::lround(std::log10(lo) * p);
  const long last = std::lround(std::log10(hi) * p);
  std::vector<double> grid;
  for (long k = first; k <= last; ++k) {
    grid.push_back(std::pow(10.0, static_cast<double>(k) / p));
  }
  return grid;
}

double resolve_horizon(const ExperimentConfig& config, const Problem& problem) {
  if (config.t_end) {
    if (!(*config.t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
    return *config.t_end;
  }
  if (config.periods) {
    if (!problem.period) {
      throw ConfigError("problem '" + problem.name + "' has no period; use --t-end");
    }
    if (!(*config.periods >= 0.0)) throw ConfigError("periods must be nonnegative");
    return *config.periods * *problem.period;
  }
  return config.full_scale ? problem.horizon : problem.desk_horizon;
}

GainPolicy make_gain(GainKind kind, const ExperimentConfig& config, const Problem& problem) {
  GainPolicy policy;
  switch (kind) {
    case GainKind::Unity:
      policy = UnityGain{};
      break;
    case GainKind::Fixed:
      policy = FixedGain{config.alpha};
      break;
    case GainKind::InverseHL:
      policy = InverseHLGain{config.lipschitz.value_or(problem.lipschitz)};
      break;
    case GainKind::Adaptive:
      policy = AdaptiveGain{config.c, config.h_min, config.t_update.value_or(problem.t_update),
                            HessianNorm::Frobenius};
      break;
  }
  validate(policy);
  return policy;
}

std::vector<CellConfig> expand_cells(const ExperimentConfig& config) {
  const Problem problem = make_problem(config.problem);
  if (config.methods.empty()) throw ConfigError("method list is empty");

  std::vector<double> hs = config.h_values;
  const auto& range = config.full_scale && config.full_h_range ? config.full_h_range
                                                               : config.h_range;
  if (range) {
    const auto grid = decade_grid(range->first, range->second, config.points_per_decade);
    hs.insert(hs.end(), grid.begin(), grid.end());
  }
  if (hs.empty()) throw ConfigError("no step sizes given (use --h or --h-range)");
  for (double h : hs) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("step sizes must be positive");
  }
  std::sort(hs.begin(), hs.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());

  const double t_end = resolve_horizon(config, problem);
  if (config.stride && *config.stride == 0) throw ConfigError("stride must be positive");

  std::vector<CellConfig> cells;
  for (const auto& method_name : config.methods) {
    const Method method = parse_method(method_name);
    if (method == Method::StrangSplitting && config.problem != "rigid_body") {
      throw ConfigError("strang_splitting is only available for rigid_body");
    }
    if (method == Method::StormerVerlet && !is_kepler_family(config.problem)) {
      throw ConfigError("stormer_verlet is only available for the Kepler problems");
    }

    std::vector<std::optional<GainPolicy>> gains;
    if (method == Method::AdaptiveFeedback) {
      gains.emplace_back(make_gain(GainKind::Adaptive, config, problem));
    } else if (uses_feedback(method)) {
      if (config.gains.empty()) throw ConfigError("gain list is empty");
      for (const auto& g : config.gains) {
        const GainKind kind = parse_gain(g);
        if (kind == GainKind::Adaptive && method == Method::FeedbackRK4) {
          throw ConfigError("adaptive gain is only defined for the Euler stepper");
        }
        gains.emplace_back(make_gain(kind, config, problem));
      }
    } else {
      gains.emplace_back(std::nullopt);
    }

    for (const auto& gain : gains) {
      for (double h : hs) {
        cells.push_back({config.problem, method, gain, h, t_end, config.stride});
      }
    }
  }
  return cells;
}

ExperimentRecord run_cell(const CellConfig& cell) {
  const Problem problem = make_problem(cell.problem);
  const DynamicalSystem& system = *problem.system;
  RunSettings settings;
  settings.h = cell.h;
  settings.t_end = cell.t_end;
  settings.stride = cell.stride;

  RunRecord record;
  switch (cell.method) {
    case Method::Euler:
    case Method::RK4: {
      const auto m = cell.method == Method::Euler ? StepMethod::Euler : StepMethod::RK4;
      record = integrate(system, problem.lyapunov, m, std::nullopt, problem.initial_state,
                         settings)
                   .record;
      break;
    }
    case Method::FeedbackEuler:
    case Method::FeedbackRK4:
    case Method::AdaptiveFeedback: {
      const auto m = cell.method == Method::FeedbackRK4 ? StepMethod::RK4 : StepMethod::Euler;
      record = integrate(system, problem.lyapunov, m, cell.gain, problem.initial_state, settings)
                   .record;
      break;
    }
    case Method::StrangSplitting: {
      const auto* body = dynamic_cast<const RigidBodySystem*>(&system);
      if (body == nullptr) throw ConfigError("strang_splitting requires the rigid body");
      const Vec3 inertia = body->inertia();
      const StepMap step = [inertia](std::span<double> x, double h, std::size_t) {
        strang_splitting_step(x, h, inertia);
        return StepReport{};
      };
      record = drive(system, problem.lyapunov, step, problem.initial_state, settings).record;
      record.alpha_desc = "none";
      break;
    }
    case Method::StormerVerlet: {
      const auto* central = dynamic_cast<const CentralForceSystem*>(&system);
      if (central == nullptr) throw ConfigError("stormer_verlet requires a central force");
      const Acceleration accel = [central](std::span<const double, 3> p, std::span<double, 3> a) {
        central->acceleration(p, a);
      };
      const StepMap step = [&accel](std::span<double> x, double h, std::size_t) {
        stormer_verlet_step(x, h, accel);
        return StepReport{};
      };
      record = drive(system, problem.lyapunov, step, problem.initial_state, settings).record;
      record.alpha_desc = "none";
      break;
    }
  }
  return {cell.problem, std::string(to_string(cell.method)), cell.h, std::move(record)};
}

std::vector<ExperimentRecord> sweep(const ExperimentConfig& config) {
  const auto cells = expand_cells(config);
  if (config.jobs < 1) throw ConfigError("jobs must be >= 1");
  std::vector<ExperimentRecord> records(cells.size());

  const auto safe_run = [&](std::size_t i) {
    try {
      records[i] = run_cell(cells[i]);
    } catch (const std::exception& e) {
      // A failing cell still produces a row; the sweep continues.
      records[i] = {cells[i].problem, std::string(to_string(cells[i].method)), cells[i].h, {}};
      records[i].run.diverged = true;
      records[i].run.divergence_step = 0;
      records[i].run.divergence_reason = e.what();
      records[i].run.alpha_desc = "error";
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.jobs), cells.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) safe_run(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) safe_run(i);
    });
  }
  for (auto& t : pool) t.join();
  return records;
}

std::vector<std::string> deviation_names(std::string_view problem) {
  const Problem p = make_problem(problem);
  std::vector<std::string> names;
  for (const auto& m : p.system->monitors()) names.push_back(m.name);
  return names;
}

std::string csv_header(std::string_view problem) {
  std::string h = "problem,method,h,alpha_desc,max_V";
  for (const auto& name : deviation_names(problem)) h += ",dev_" + name;
  h += ",steps,cpu_seconds,diverged,divergence_step";
  return h;
}

std::string csv_row(const ExperimentRecord& r) {
  std::string row = r.problem + "," + r.method + "," + fmt17(r.h) + "," + r.run.alpha_desc +
                    "," + fmt17(r.run.max_value);
  if (r.run.deviations.empty()) {
    // Cell failed before any metric existed; keep the column count stable.
    for (std::size_t i = 0; i < deviation_names(r.problem).size(); ++i) row += ",nan";
  }
  for (const auto& d : r.run.deviations) row += "," + fmt17(d.max_deviation);
  row += "," + std::to_string(r.run.steps) + "," + fmt17(r.run.wall_seconds) + "," +
         (r.run.diverged ? "true" : "false") + ",";
  if (r.run.divergence_step) row += std::to_string(*r.run.divergence_step);
  return row;
}

void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records,
               std::string_view problem, bool with_header) {
  if (with_header) out << csv_header(problem) << '\n';
  for (const auto& r : records) out << csv_row(r) << '\n';
}

}  // namespace fbi
