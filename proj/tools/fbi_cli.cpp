// fbi: command-line front end for feedback-integrator experiments.
//
//   fbi run      --problem kepler --method feedback_euler --gain inverse_hl --h 1e-3 --periods 10
//   fbi sweep    --preset kepler_fig3 --jobs 4 --out kepler.csv
//   fbi estimate-lipschitz --problem kepler
//   fbi check    --problem all --seed 42
//   fbi presets
//
// Exit codes: 0 success, 1 configuration error, 2 check failure, 3 I/O error.
// A diverged run is reported in the output rows, not through the exit code.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fbi/errors.hpp"
#include "fbi/gain.hpp"
#include "fbi/harness.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitCheck = 2;
constexpr int kExitIo = 3;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_commas(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

// Flags shared by run and sweep. Values stay unset unless given on the command line.
struct ExperimentFlags {
  std::string preset;
  std::string config_path;
  std::string experiment;
  std::string problem;
  std::vector<std::string> methods;
  std::vector<std::string> gains;
  double alpha = 0, lipschitz = 0, c = 0, h_min = 0, t_update = 0, t_end = 0, periods = 0;
  std::vector<double> h;
  std::vector<double> h_range;
  int points_per_decade = 0;
  std::size_t stride = 0;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool full_scale = false;

  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app) {
    opts["preset"] = app->add_option("--preset", preset, "Start from a named preset");
    opts["config"] = app->add_option("--config", config_path, "YAML experiment file");
    opts["experiment"] =
        app->add_option("--experiment", experiment, "Table name in the config file");
    opts["problem"] =
        app->add_option("--problem", problem, "rigid_body | kepler | perturbed_kepler");
    opts["method"] = app->add_option("--method", methods,
                                     "euler | rk4 | feedback_euler | feedback_rk4 | "
                                     "adaptive_feedback | strang_splitting | stormer_verlet");
    opts["gain"] = app->add_option("--gain", gains, "unity | fixed | inverse_hl | adaptive");
    opts["alpha"] = app->add_option("--alpha", alpha, "Gain for --gain fixed");
    opts["lipschitz"] = app->add_option("--lipschitz", lipschitz, "L for --gain inverse_hl");
    opts["c"] = app->add_option("--c", c, "Adaptive safety factor (> 1)");
    opts["hmin"] = app->add_option("--hmin", h_min, "Adaptive clip H_min (> 0)");
    opts["t-update"] = app->add_option("--t-update", t_update, "Adaptive update period");
    opts["h"] = app->add_option("--h", h, "Step size(s)");
    opts["h-range"] =
        app->add_option("--h-range", h_range, "Decade range LO HI for the h grid")->expected(2);
    opts["points-per-decade"] =
        app->add_option("--points-per-decade", points_per_decade, "Grid density");
    opts["t-end"] = app->add_option("--t-end", t_end, "Integration horizon");
    opts["periods"] = app->add_option("--periods", periods, "Horizon in orbital periods");
    opts["stride"] = app->add_option("--stride", stride, "Trajectory storage stride");
    opts["out"] = app->add_option("--out", out, "CSV output path (default stdout)");
    opts["seed"] = app->add_option("--seed", seed, "RNG seed");
    opts["jobs"] = app->add_option("--jobs", jobs, "Parallel cells");
    opts["full-scale"] = app->add_flag("--full-scale", full_scale,
                                       "Use full horizons and h ranges from the presets");
  }

  bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

  fbi::ExperimentConfig build() const {
    fbi::ExperimentConfig cfg;
    if (given("preset") && given("config")) {
      throw fbi::ConfigError("--preset and --config are mutually exclusive");
    }
    if (given("preset")) cfg = fbi::preset(preset);
    if (given("config")) {
      std::vector<fbi::ExperimentConfig> all;
      try {
        all = fbi::load_config_file(config_path);
      } catch (const std::ios_base::failure& e) {
        throw IoError(e.what());
      }
      if (given("experiment")) {
        const auto it = std::find_if(all.begin(), all.end(),
                                     [&](const auto& e) { return e.name == experiment; });
        if (it == all.end()) throw fbi::ConfigError("no experiment '" + experiment + "'");
        cfg = *it;
      } else {
        cfg = all.front();
      }
    }
    if (given("problem")) cfg.problem = problem;
    if (given("method")) cfg.methods = split_commas(methods);
    if (given("gain")) cfg.gains = split_commas(gains);
    if (given("alpha")) cfg.alpha = alpha;
    if (given("lipschitz")) cfg.lipschitz = lipschitz;
    if (given("c")) cfg.c = c;
    if (given("hmin")) cfg.h_min = h_min;
    if (given("t-update")) cfg.t_update = t_update;
    if (given("h")) {
      cfg.h_values = h;
      if (!given("h-range")) {
        cfg.h_range.reset();
        cfg.full_h_range.reset();
      }
    }
    if (given("h-range")) {
      cfg.h_range = std::pair{h_range[0], h_range[1]};
      cfg.full_h_range.reset();
    }
    if (given("points-per-decade")) cfg.points_per_decade = points_per_decade;
    if (given("t-end")) {
      cfg.t_end = t_end;
      cfg.periods.reset();
    }
    if (given("periods")) cfg.periods = periods;
    if (given("stride")) cfg.stride = stride;
    if (given("out")) cfg.out = out;
    if (given("seed")) cfg.seed = seed;
    if (given("jobs")) cfg.jobs = jobs;
    if (given("full-scale")) cfg.full_scale = full_scale;
    return cfg;
  }
};

void emit(const fbi::ExperimentConfig& cfg, const std::vector<fbi::ExperimentRecord>& records,
          bool append) {
  if (cfg.out.empty()) {
    fbi::write_csv(std::cout, records, cfg.problem);
    return;
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  const bool has_content = append && fs::exists(cfg.out, ec) && fs::file_size(cfg.out, ec) > 0;
  std::ofstream file(cfg.out, append ? std::ios::app : std::ios::trunc);
  if (!file) throw IoError("cannot write " + cfg.out);
  fbi::write_csv(file, records, cfg.problem, !has_content);
  if (!file) throw IoError("write failed for " + cfg.out);
}

int cmd_run(const ExperimentFlags& flags) {
  const auto cfg = flags.build();
  const auto cells = fbi::expand_cells(cfg);
  if (cells.size() != 1) {
    throw fbi::ConfigError("run takes exactly one method, gain and step size (got " +
                           std::to_string(cells.size()) + " cells; use sweep)");
  }
  const auto record = fbi::run_cell(cells.front());
  emit(cfg, {record}, true);
  if (!cfg.out.empty()) std::cout << fbi::csv_row(record) << '\n';
  return 0;
}

int cmd_sweep(const ExperimentFlags& flags) {
  const auto cfg = flags.build();
  const auto records = fbi::sweep(cfg);
  emit(cfg, records, false);
  return 0;
}

int cmd_estimate(const std::string& problem_name, double h_probe, std::optional<double> window,
                 const std::string& norm) {
  const auto problem = fbi::make_problem(problem_name);
  fbi::LipschitzProbeOptions opts;
  opts.h_probe = h_probe;
  opts.window = window.value_or(problem.probe_window);
  if (norm == "frobenius") {
    opts.norm = fbi::HessianNorm::Frobenius;
  } else if (norm == "spectral") {
    opts.norm = fbi::HessianNorm::Spectral;
  } else {
    throw fbi::ConfigError("--norm must be frobenius or spectral");
  }
  const auto est =
      fbi::estimate_lipschitz(*problem.system, problem.lyapunov, problem.initial_state, opts);
  std::cout.precision(10);
  std::cout << "problem " << problem.name << " h_probe " << opts.h_probe << " window "
            << opts.window << " norm " << norm << '\n'
            << "L = " << est.max_norm << '\n'
            << "hess_norm range = [" << est.min_norm << ", " << est.max_norm << "] over "
            << est.samples << " samples (stride " << est.stride << ")\n"
            << "reference L = " << problem.lipschitz << '\n';
  return 0;
}

int cmd_check(const std::string& problem_name, std::uint64_t seed) {
  std::vector<std::string> names;
  if (problem_name == "all") {
    names = fbi::problem_names();
  } else {
    names = {problem_name};
  }
  bool ok = true;
  for (const auto& name : names) {
    const auto report = fbi::check_problem(name, seed);
    fbi::print_report(std::cout, report);
    ok = ok && report.passed();
  }
  return ok ? 0 : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback integrator experiments"};
  app.require_subcommand(1);
  // --h is the step size, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");

  ExperimentFlags run_flags;
  auto* run = app.add_subcommand("run", "Run one (problem, method, gain, h) cell");
  run_flags.attach(run);

  ExperimentFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Sweep methods and gains over a step-size grid");
  sweep_flags.attach(sweep);

  std::string est_problem = "kepler";
  double est_h = 1e-4;
  double est_window = 0.0;
  std::string est_norm = "frobenius";
  auto* est = app.add_subcommand("estimate-lipschitz",
                                 "Max Hessian norm of V along a unity-gain probe run");
  est->add_option("--problem", est_problem, "Problem name");
  est->add_option("--h", est_h, "Probe step size");
  auto* window_opt = est->add_option("--window", est_window, "Probe window length");
  est->add_option("--norm", est_norm, "frobenius | spectral");

  std::string check_problem = "all";
  std::uint64_t check_seed = 42;
  auto* check = app.add_subcommand("check", "Orthogonality, gradient and Hessian property checks");
  check->add_option("--problem", check_problem, "Problem name or 'all'");
  check->add_option("--seed", check_seed, "RNG seed");

  auto* presets = app.add_subcommand("presets", "Print the shipped presets as YAML");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*sweep) return cmd_sweep(sweep_flags);
    if (*est) {
      return cmd_estimate(est_problem, est_h,
                          window_opt->count() ? std::optional<double>(est_window) : std::nullopt,
                          est_norm);
    }
    if (*check) return cmd_check(check_problem, check_seed);
    if (*presets) {
      std::cout << fbi::presets_yaml() << '\n';
      return 0;
    }
  } catch (const fbi::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fbi::EstimationFailed& e) {
    std::cerr << "estimation failed: " << e.what() << " (partial max " << e.partial_max()
              << ")\n";
    return kExitConfig;
  }
  return 0;
}
