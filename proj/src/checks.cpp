#include <cmath>
#include <ostream>

#include "fbi/errors.hpp"
#include "fbi/harness.hpp"

namespace fbi {
namespace {

// Uniformly random rotation from a normalized Gaussian quaternion.
Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  double q[4];
  double n = 0.0;
  do {
    n = 0.0;
    for (double& c : q) {
      c = gauss(rng);
      n += c * c;
    }
  } while (n < 1e-12);
  n = std::sqrt(n);
  const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
  return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
          2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
          2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
}

}  // namespace

State random_domain_state(std::string_view problem, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  if (problem == "rigid_body") {
    State s(RigidBodySystem::kDim);
    do {
      const Mat3 r = random_rotation(rng);
      for (int i = 0; i < 9; ++i) s[i] = r[i] + 0.3 * unit(rng);
    } while (!(det3(std::span<const double, 9>(s.data(), 9)) > 0.05));
    for (int i = 9; i < 12; ++i) s[i] = 2.0 * unit(rng);
    return s;
  }
  if (problem == "kepler" || problem == "perturbed_kepler") {
    const double pos_scale = problem == "kepler" ? 3.0 : 2.0;
    const double vel_scale = problem == "kepler" ? 1.5 : 2.0;
    State s(CentralForceSystem::kDim);
    double r = 0.0;
    do {
      for (int i = 0; i < 3; ++i) s[i] = pos_scale * unit(rng);
      r = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
    } while (r < 0.2);
    for (int i = 3; i < 6; ++i) s[i] = vel_scale * unit(rng);
    return s;
  }
  throw ConfigError("unknown problem '" + std::string(problem) + "'");
}

bool CheckReport::passed() const noexcept {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

CheckReport run_checks(std::string_view problem_name, const DynamicalSystem& system,
                       const LyapunovFunction& lyapunov, std::uint64_t seed,
                       const CheckOptions& options) {
  CheckReport report;
  report.problem = std::string(problem_name);
  report.seed = seed;
  std::mt19937_64 rng(seed);

  const auto record = [](CheckResult& c, double residual, std::span<const double> x) {
    if (std::isnan(c.worst)) return;  // first NaN stays the reported worst case
    if (c.worst_state.empty() || !(residual <= c.worst)) {
      c.worst = residual;
      c.worst_state.assign(x.begin(), x.end());
    }
  };

  // (A1): <grad V, f> = 0, relative to 1 + |grad V| |f|.
  CheckResult ortho{"orthogonality", 0.0, options.orthogonality_tol};
  for (std::size_t i = 0; i < options.orthogonality_samples; ++i) {
    const State x = random_domain_state(problem_name, rng);
    const State f = system.field(x);
    const State g = lyapunov.gradient(x);
    const double residual = std::abs(dot(g, f)) / (1.0 + norm2(g) * norm2(f));
    record(ortho, residual, x);
  }

  CheckResult grad{"gradient_fd", 0.0, options.gradient_tol};
  for (std::size_t i = 0; i < options.gradient_samples; ++i) {
    const State x = random_domain_state(problem_name, rng);
    const State g = lyapunov.gradient(x);
    const State g_fd = finite_difference_gradient(lyapunov, x);
    State diff(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) diff[k] = g[k] - g_fd[k];
    const double residual = norm2(diff) / std::max(norm2(g), 1e-300);
    record(grad, residual, x);
  }

  CheckResult sym{"hessian_symmetry", 0.0, options.symmetry_tol};
  const std::size_t n = lyapunov.dim();
  for (std::size_t i = 0; i < options.hessian_samples; ++i) {
    const State x = random_domain_state(problem_name, rng);
    const auto h = finite_difference_hessian(lyapunov, x);
    std::vector<double> skew(n * n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) skew[r * n + c] = h[r * n + c] - h[c * n + r];
    }
    const double residual = frobenius_norm(skew) / std::max(frobenius_norm(h), 1e-300);
    record(sym, residual, x);
  }

  for (auto* c : {&ortho, &grad, &sym}) {
    c->passed = c->worst <= c->tolerance;
    report.checks.push_back(std::move(*c));
  }
  return report;
}

CheckReport check_problem(std::string_view problem_name, std::uint64_t seed,
                          const CheckOptions& options) {
  const Problem problem = make_problem(problem_name);
  return run_checks(problem_name, *problem.system, problem.lyapunov, seed, options);
}

void print_report(std::ostream& out, const CheckReport& report) {
  out << "problem " << report.problem << " seed " << report.seed << '\n';
  const auto old = out.precision(17);
  for (const auto& c : report.checks) {
    out << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << " worst=" << c.worst
        << " tol=" << c.tolerance << '\n';
    if (!c.passed) {
      out << "    state:";
      for (double v : c.worst_state) out << ' ' << v;
      out << '\n';
    }
  }
  out.precision(old);
}

}  // namespace fbi
