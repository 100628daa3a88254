// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "fbi/baselines.hpp"
#include "fbi/gain.hpp"
#include "fbi/harness.hpp"
#include "fbi/problems.hpp"
#include "fbi/stepper.hpp"

using namespace fbi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double ulp(double v) {
  v = std::abs(v);
  return std::nextafter(v, std::numeric_limits<double>::infinity()) - v;
}

bool within_ulps(double a, double b, int n) {
  return std::abs(a - b) <= n * ulp(std::max({std::abs(a), std::abs(b), 1e-300}));
}

State rk4_to(const DynamicalSystem& sys, State x, double h, double t_end,
             const std::function<void(const State&)>& each = {}) {
  ExplicitStepper st(StepMethod::RK4, sys.dim());
  const auto f = sys.as_field();
  for (std::size_t k = 0, n = step_count(t_end, h); k < n; ++k) {
    st.step(f, x, h);
    if (each) each(x);
  }
  return x;
}

Outcome orthogonality() {
  CheckOptions o;
  o.gradient_samples = 0;
  o.hessian_samples = 0;
  Outcome out{true, ""};
  for (const auto& name : problem_names()) {
    const auto r = check_problem(name, 42, o);
    out.pass = out.pass && r.passed();
    out.detail += fmt("%s %.2e  ", name.c_str(), r.checks[0].worst);
  }
  return out;
}

Outcome gradient_hessian() {
  CheckOptions o;
  o.orthogonality_samples = 0;
  Outcome out{true, ""};
  for (const auto& name : problem_names()) {
    const auto r = check_problem(name, 42, o);
    out.pass = out.pass && r.passed();
    out.detail += fmt("%s grad %.1e sym %.1e  ", name.c_str(), r.checks[1].worst, r.checks[2].worst);
  }
  return out;
}

Outcome conservation() {
  Outcome out{true, ""};
  for (const auto& name : problem_names()) {
    const auto p = make_problem(name);
    std::vector<std::vector<double>> ref;
    for (const auto& f : p.system->integrals()) ref.push_back(f.eval(p.initial_state));
    double worst = 0;
    std::size_t k = 0;
    rk4_to(*p.system, p.initial_state, 1e-5, 10.0, [&](const State& x) {
      if (++k % 100 != 0) return;
      const auto& ints = p.system->integrals();
      for (std::size_t j = 0; j < ints.size(); ++j) {
        const auto v = ints[j].eval(x);
        for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(v[i] - ref[j][i]));
      }
    });
    out.pass = out.pass && worst <= 1e-7;
    out.detail += fmt("%s %.1e  ", name.c_str(), worst);
  }
  return out;
}

Outcome kepler_period() {
  const auto p = make_kepler();
  const auto x = rk4_to(*p.system, p.initial_state, 1e-5, kKeplerPeriod);
  const double d = distance(std::span(x).first(3), std::span(p.initial_state).first(3));
  return {d <= 1e-3, fmt("|x(T) - x_I| = %.2e", d)};
}

Outcome lipschitz() {
  LipschitzProbeOptions o;
  const auto k = make_kepler();
  o.window = k.probe_window;
  const auto ek = estimate_lipschitz(*k.system, k.lyapunov, k.initial_state, o);
  const auto pk = make_perturbed_kepler();
  o.window = pk.probe_window;
  const auto ep = estimate_lipschitz(*pk.system, pk.lyapunov, pk.initial_state, o);
  const auto rb = make_rigid_body();
  o.window = rb.probe_window;
  const auto er = estimate_lipschitz(*rb.system, rb.lyapunov, rb.initial_state, o);

  const bool k_ok = std::abs(ek.max_norm / 515.4 - 1) <= 0.05;
  const bool p_ok = std::abs(ep.max_norm / 148.03 - 1) <= 0.05;
  const bool r_ok = er.min_norm >= 2334.63 * 0.95 && er.max_norm <= 2412.56 * 1.05;
  return {k_ok && p_ok && r_ok,
          fmt("kepler %.2f (%+.1f%%) %s, perturbed %.2f (%+.1f%%) %s, rigid [%.2f, %.2f] %s",
              ek.max_norm, 100 * (ek.max_norm / 515.4 - 1), k_ok ? "ok" : "out",
              ep.max_norm, 100 * (ep.max_norm / 148.03 - 1), p_ok ? "ok" : "out",
              er.min_norm, er.max_norm, r_ok ? "ok" : "out")};
}

RunRecord kepler_run(const std::optional<GainPolicy>& gain, double h, double periods,
                     std::span<const Observer> obs = {}) {
  const auto p = make_kepler();
  RunSettings s;
  s.h = h;
  s.t_end = periods * kKeplerPeriod;
  return integrate(*p.system, p.lyapunov, StepMethod::Euler, gain, p.initial_state, s, obs).record;
}

Outcome divergence_boundary() {
  const auto u2 = kepler_run(UnityGain{}, 1e-2, 10);
  const auto u3 = kepler_run(UnityGain{}, 1e-3, 10);
  const auto hl = kepler_run(InverseHLGain{515.4}, 1e-3, 10);
  const auto ad = kepler_run(AdaptiveGain{1.1, 1e-10, 0.1}, 1e-3, 10);
  const bool a = u2.diverged;
  const bool b = u3.diverged || u3.max_deviation() >= 10 * hl.max_deviation();
  const bool c = !hl.diverged && !ad.diverged;
  return {a && b && c,
          fmt("unity 1e-2 diverged=%d; unity 1e-3 dev %.2e vs 1/(hL) %.2e (x%.0f); adaptive dev %.2e",
              int(u2.diverged), u3.max_deviation(), hl.max_deviation(),
              u3.max_deviation() / hl.max_deviation(), ad.max_deviation())};
}

Outcome positive_invariance() {
  double first = 0, rest = 0;
  const Observer obs = [&](const StepInfo& i) {
    (i.t <= kKeplerPeriod ? first : rest) = std::max(i.t <= kKeplerPeriod ? first : rest, i.value);
  };
  const auto r = kepler_run(InverseHLGain{515.4}, 1e-3, 10, {&obs, 1});
  return {!r.diverged && rest <= 10 * first,
          fmt("max V period 1 = %.3e, periods 2-10 = %.3e (ratio %.2f)", first, rest, rest / first)};
}

Outcome adaptive_identity() {
  const AdaptiveGain g{1.1, 1e-10, 0.1};
  const double h = 1e-3;
  const std::size_t n = block_length(g.t_update, h);
  double worst = 0;
  bool constant = true, boundaries = true;
  std::size_t k = 0, updates = 0;
  double alpha = 0;
  const Observer obs = [&](const StepInfo& i) {
    const auto& r = i.report;
    if (r.gain_updated != (k % n == 0)) boundaries = false;
    if (r.gain_updated) {
      ++updates;
      worst = std::max(worst, std::abs(h * r.alpha * g.c * std::max(r.hess_norm, g.h_min) - 1));
    } else if (r.alpha != alpha) {
      constant = false;
    }
    alpha = r.alpha;
    ++k;
  };
  const auto rec = kepler_run(g, h, 10, {&obs, 1});
  const double eps = std::numeric_limits<double>::epsilon();
  return {!rec.diverged && n == 100 && worst <= 4 * eps && constant && boundaries,
          fmt("n = %zu, %zu updates, max |hAcB - 1| = %.2g eps, bit-constant=%d, breakpoints=%d", n,
              updates, worst / eps, int(constant), int(boundaries))};
}

Outcome baselines() {
  const Vec3 inertia{3, 2, 1};
  const State rb0{1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1};
  RigidBodySystem rb;
  const auto rb_ref = rk4_to(rb, rb0, 1e-4, 10.0);
  double se[2];
  for (int j = 0; j < 2; ++j) {
    const double h = j == 0 ? 1e-2 : 5e-3;
    State x = rb0;
    for (std::size_t k = 0, m = step_count(10.0, h); k < m; ++k) strang_splitting_step(x, h, inertia);
    se[j] = distance(x, rb_ref);
  }

  KeplerSystem kep;
  const auto kp = make_kepler();
  const Acceleration acc = [&](std::span<const double, 3> p, std::span<double, 3> a) {
    kep.acceleration(p, a);
  };
  const auto k_ref = rk4_to(kep, kp.initial_state, 1e-5, 10.0);
  double ve[2];
  for (int j = 0; j < 2; ++j) {
    const double h = j == 0 ? 1e-3 : 5e-4;
    State x = kp.initial_state;
    for (std::size_t k = 0, m = step_count(10.0, h); k < m; ++k) stormer_verlet_step(x, h, acc);
    ve[j] = distance(x, k_ref);
  }

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2, 2);
  bool subflow = true;
  for (int t = 0; t < 300; ++t) {
    State x = rb0;
    for (int i = 9; i < 12; ++i) x[i] = u(rng);
    const int axis = t % 3;
    const Vec3 p0{3 * x[9], 2 * x[10], x[11]};
    rigid_body_axis_flow(x, axis, u(rng), inertia);
    const Vec3 p1{3 * x[9], 2 * x[10], x[11]};
    const double n0 = p0[0] * p0[0] + p0[1] * p0[1] + p0[2] * p0[2];
    const double n1 = p1[0] * p1[0] + p1[1] * p1[1] + p1[2] * p1[2];
    const double h0 = p0[axis] * p0[axis] / (2 * inertia[axis]);
    const double h1 = p1[axis] * p1[axis] / (2 * inertia[axis]);
    subflow = subflow && within_ulps(n0, n1, 8) && within_ulps(h0, h1, 8);
  }

  bool reversible = true;
  for (int t = 0; t < 300; ++t) {
    State x0{1 + 0.3 * u(rng) / 2, 0.3 * u(rng) / 2, 0.05 * u(rng), 0.15 * u(rng),
             1.3 + 0.05 * u(rng), 0.05 * u(rng)};
    State x = x0;
    stormer_verlet_step(x, 1e-3, acc);
    for (int i = 3; i < 6; ++i) x[i] = -x[i];
    stormer_verlet_step(x, 1e-3, acc);
    for (int i = 3; i < 6; ++i) x[i] = -x[i];
    for (int i = 0; i < 6; ++i) reversible = reversible && within_ulps(x[i], x0[i], 8);
  }

  const double sr = se[0] / se[1], vr = ve[0] / ve[1];
  const bool orders = std::abs(sr / 4 - 1) <= 0.3 && std::abs(vr / 4 - 1) <= 0.3;
  return {orders && subflow && reversible,
          fmt("strang ratio %.3f, verlet ratio %.3f, sub-flow |pi|^2 and H_i within 8 ulp=%d, "
              "reversible=%d",
              sr, vr, int(subflow), int(reversible))};
}

std::string strip_timing(const std::string& path) {
  std::ifstream in(path);
  std::string line, out;
  while (std::getline(in, line)) {
    // cpu_seconds is the third field from the end.
    const auto last = line.rfind(',');
    const auto second = line.rfind(',', last - 1);
    const auto third = line.rfind(',', second - 1);
    out += line.substr(0, third) + line.substr(second) + '\n';
  }
  return out;
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "fbi_acceptance";
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  for (const char* jobs : {"1", "1", "4", "4"}) {
    const auto path = (dir / ("sweep_" + std::to_string(outputs.size()) + ".csv")).string();
    const std::string cmd = std::string(FBI_CLI_PATH) +
                            " sweep --preset kepler_fig3 --seed 7 --jobs " + jobs + " --out " +
                            path + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "sweep command failed"};
    outputs.push_back(strip_timing(path));
  }
  fs::remove_all(dir);
  bool same = true;
  for (const auto& o : outputs) same = same && o == outputs.front();
  const auto rows = std::count(outputs.front().begin(), outputs.front().end(), '\n') - 1;
  return {same && rows > 0, fmt("%ld rows, identical across 2x jobs=1 and 2x jobs=4: %d",
                                static_cast<long>(rows), int(same))};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;
    Outcome (*fn)();
  };
  const Criterion criteria[] = {
      {1, "orthogonality suite", 5, orthogonality},
      {2, "gradient and Hessian consistency", 10, gradient_hessian},
      {3, "exact-flow conservation", 60, conservation},
      {4, "Kepler period", 60, kepler_period},
      {5, "Lipschitz reproduction", 120, lipschitz},
      {6, "divergence boundary", 120, divergence_boundary},
      {7, "positive invariance", 60, positive_invariance},
      {8, "adaptive identity", 30, adaptive_identity},
      {9, "baseline orders", 60, baselines},
      {10, "determinism", 120, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = c.fn();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.budget;
    failed += pass ? 0 : 1;
    std::printf("%s %2d %-34s %7.2fs/%-4.0fs %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.budget, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
