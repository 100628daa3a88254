/**
 * @file harness.hpp
 * @brief Experiment configuration, single runs, step-size sweeps, CSV output
 *        and the property self-checks behind the command-line tool.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fbi/gain.hpp"
#include "fbi/integrate.hpp"
#include "fbi/problems.hpp"

namespace fbi {

enum class Method {
  Euler,
  RK4,
  FeedbackEuler,
  FeedbackRK4,
  AdaptiveFeedback,
  StrangSplitting,
  StormerVerlet,
};

[[nodiscard]] std::string_view to_string(Method method) noexcept;
/// Throws ConfigError for an unknown name.
[[nodiscard]] Method parse_method(std::string_view name);
[[nodiscard]] bool uses_feedback(Method method) noexcept;

enum class GainKind { Unity, Fixed, InverseHL, Adaptive };

[[nodiscard]] std::string_view to_string(GainKind kind) noexcept;
[[nodiscard]] GainKind parse_gain(std::string_view name);

struct ExperimentConfig {
  std::string name;
  std::string problem = "kepler";
  std::vector<std::string> methods{"feedback_euler"};
  std::vector<std::string> gains{"unity"};
  double alpha = 1.0;
  std::optional<double> lipschitz;  ///< defaults to the problem's reference L
  double c = 1.1;
  double h_min = 1e-10;
  std::optional<double> t_update;   ///< defaults to the problem's update period
  std::vector<double> h_values;
  std::optional<std::pair<double, double>> h_range;
  /// Replaces h_range when full_scale is set.
  std::optional<std::pair<double, double>> full_h_range;
  int points_per_decade = 3;
  std::optional<double> t_end;
  std::optional<double> periods;
  bool full_scale = false;
  std::optional<std::size_t> stride;
  std::string out;
  std::uint64_t seed = 42;
  int jobs = 1;
};

/// One (problem, method, gain, h) cell of an experiment.
struct CellConfig {
  std::string problem;
  Method method = Method::FeedbackEuler;
  std::optional<GainPolicy> gain;
  double h = 1e-3;
  double t_end = 0.0;
  std::optional<std::size_t> stride;
};

struct ExperimentRecord {
  std::string problem;
  std::string method;
  double h = 0.0;
  RunRecord run;
};

/// Log-uniform grid 10^(k / points_per_decade) covering [lo, hi], ascending.
[[nodiscard]] std::vector<double> decade_grid(double lo, double hi, int points_per_decade);

/// Integration horizon for a config: t_end, else periods * T, else desk or full horizon.
[[nodiscard]] double resolve_horizon(const ExperimentConfig& config, const Problem& problem);

/// Gain policy for one gain name, filled from the config and problem defaults.
[[nodiscard]] GainPolicy make_gain(GainKind kind, const ExperimentConfig& config,
                                   const Problem& problem);

/**
 * @brief Expands a config into cells ordered by (method, gain, h).
 *
 * Validates problem/method compatibility and all parameters; throws ConfigError.
 */
[[nodiscard]] std::vector<CellConfig> expand_cells(const ExperimentConfig& config);

/// Runs one cell. Divergence yields a record with diverged = true.
[[nodiscard]] ExperimentRecord run_cell(const CellConfig& cell);

/// Runs every cell with up to `jobs` threads; output order is the cell order.
[[nodiscard]] std::vector<ExperimentRecord> sweep(const ExperimentConfig& config);

/// Deviation column names for a problem, e.g. {"E", "pi", "orth"} for the rigid body.
[[nodiscard]] std::vector<std::string> deviation_names(std::string_view problem);

[[nodiscard]] std::string csv_header(std::string_view problem);
[[nodiscard]] std::string csv_row(const ExperimentRecord& record);
void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records,
               std::string_view problem, bool with_header = true);

// ---------------------------------------------------------------------------
// Configuration files and presets

/// Parses every experiment table of a YAML document. Throws ConfigError.
[[nodiscard]] std::vector<ExperimentConfig> parse_config(std::string_view text);
[[nodiscard]] std::vector<ExperimentConfig> load_config_file(const std::string& path);

[[nodiscard]] const std::vector<ExperimentConfig>& presets();
[[nodiscard]] ExperimentConfig preset(std::string_view name);
[[nodiscard]] std::string presets_yaml();

// ---------------------------------------------------------------------------
// Property self-checks

/// Random state in the problem's domain, spread well away from the initial state.
[[nodiscard]] State random_domain_state(std::string_view problem, std::mt19937_64& rng);

struct CheckOptions {
  std::size_t orthogonality_samples = 1000;
  std::size_t gradient_samples = 100;
  std::size_t hessian_samples = 100;
  double orthogonality_tol = 1e-9;
  double gradient_tol = 1e-6;
  double symmetry_tol = 1e-3;
};

struct CheckResult {
  std::string name;
  double worst = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  State worst_state;
};

struct CheckReport {
  std::string problem;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  [[nodiscard]] bool passed() const noexcept;
};

[[nodiscard]] CheckReport run_checks(std::string_view problem_name,
                                     const DynamicalSystem& system,
                                     const LyapunovFunction& lyapunov, std::uint64_t seed,
                                     const CheckOptions& options = {});

[[nodiscard]] CheckReport check_problem(std::string_view problem_name, std::uint64_t seed,
                                        const CheckOptions& options = {});

void print_report(std::ostream& out, const CheckReport& report);

}  // namespace fbi
