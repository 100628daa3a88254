#include <cmath>
#include <limits>

#include "doctest.h"
#include "fbi/errors.hpp"
#include "fbi/gain.hpp"
#include "fbi/problems.hpp"

using namespace fbi;

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

TEST_CASE("fixed gain resolution") {
  CHECK(resolve_fixed_gain(UnityGain{}, 1e-3) == 1.0);
  CHECK(resolve_fixed_gain(UnityGain{}, 0.5) == 1.0);
  CHECK(resolve_fixed_gain(FixedGain{2.5}, 1e-3) == 2.5);
  CHECK(resolve_fixed_gain(InverseHLGain{515.4}, 1e-3) ==
        doctest::Approx(1.94024058983314).epsilon(1e-13));
  CHECK(resolve_fixed_gain(InverseHLGain{1986.0}, 1e-4) ==
        doctest::Approx(5.03524672708963).epsilon(1e-13));
  CHECK_THROWS_AS((void)resolve_fixed_gain(AdaptiveGain{}, 1e-3), ConfigError);
}

TEST_CASE("gain policy validation") {
  CHECK_THROWS_AS(validate(FixedGain{0.0}), ConfigError);
  CHECK_THROWS_AS(validate(InverseHLGain{-1.0}), ConfigError);
  CHECK_THROWS_AS(validate(AdaptiveGain{1.0, 1e-10, 0.1}), ConfigError);
  CHECK_THROWS_AS(validate(AdaptiveGain{1.1, 0.0, 0.1}), ConfigError);
  CHECK_THROWS_AS(validate(AdaptiveGain{1.1, 1e-10, 0.0}), ConfigError);
  CHECK_NOTHROW(validate(AdaptiveGain{}));
  CHECK(is_adaptive(AdaptiveGain{}));
  CHECK_FALSE(is_adaptive(UnityGain{}));
}

TEST_CASE("descriptions contain no CSV separators") {
  for (const GainPolicy& g : {GainPolicy{UnityGain{}}, GainPolicy{FixedGain{3}},
                              GainPolicy{InverseHLGain{515.4}}, GainPolicy{AdaptiveGain{}}}) {
    const auto d = describe(g, 1e-3);
    CHECK_FALSE(d.empty());
    CHECK(d.find(',') == std::string::npos);
  }
  CHECK(describe(UnityGain{}, 1e-3) == "unity");
}

TEST_CASE("adaptive gain from a Hessian norm") {
  CHECK(adaptive_gain_from_norm(100.0, 1e-3, 1.1, 1e-10) ==
        doctest::Approx(9.09090909090909).epsilon(1e-13));
  CHECK(adaptive_gain_from_norm(0.0, 1e-3, 1.1, 1e-10) ==
        doctest::Approx(1.0 / (1.1 * 1e-3 * 1e-10)).epsilon(1e-14));
  for (double norm : {0.0, 1e-12, 3.7, 100.0, 2468.7, 1e8}) {
    for (double h : {1e-7, 1e-4, 3e-3, 0.1}) {
      const double b = std::max(norm, 1e-10);
      const double a = adaptive_gain_from_norm(norm, h, 1.1, 1e-10);
      CHECK(std::abs(h * a * 1.1 * b - 1.0) <= 4 * kEps);
    }
  }
}

TEST_CASE("adaptive gain responds monotonically") {
  const auto p = make_kepler();
  const State x{1.1, 0.2, -0.1, 0.1, 1.2, 0.05};
  const double a1 = adaptive_gain(p.lyapunov, x, 1e-3, 1.1, 1e-10);
  const double a2 = adaptive_gain(p.lyapunov, x, 1e-3, 1.5, 1e-10);
  CHECK(a2 < a1);
  CHECK(resolve_fixed_gain(InverseHLGain{200}, 1e-3) < resolve_fixed_gain(InverseHLGain{100}, 1e-3));
  const auto d = adaptive_gain_detail(p.lyapunov, x, 1e-3, 1.1, 1e-10);
  CHECK(d.hess_norm == p.lyapunov.hess_norm(x));
  CHECK(d.bound == d.hess_norm);
  CHECK(d.alpha == a1);
}

TEST_CASE("block length") {
  CHECK(block_length(0.1, 1e-3) == 100);
  CHECK(block_length(0.1, 3e-3) == 34);
  CHECK(block_length(30.0, 1e-4) == 300000);
  CHECK(block_length(1e-3, 1e-2) == 1);
  CHECK_THROWS_AS((void)block_length(0.0, 1e-3), ConfigError);
}

TEST_CASE("adaptive driver updates on block boundaries and satisfies the gain identity") {
  const auto p = make_kepler();
  RunSettings s;
  s.h = 1e-3;
  s.t_end = 2.0;
  const AdaptiveGain g{1.1, 1e-10, 0.1};
  const std::size_t n = block_length(g.t_update, s.h);
  REQUIRE(n == 100);
  std::vector<StepReport> reports;
  const Observer obs = [&](const StepInfo& info) {
    CHECK(info.step == reports.size() + 1);
    reports.push_back(info.report);
  };
  const auto r = adaptive_driver(*p.system, p.lyapunov, p.initial_state, g, s, {&obs, 1});
  CHECK_FALSE(r.record.diverged);
  REQUIRE(reports.size() == 2000);
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& rep = reports[k];
    CHECK(rep.gain_updated == (k % n == 0));
    if (rep.gain_updated) {
      const double b = std::max(rep.hess_norm, g.h_min);
      CHECK(std::abs(s.h * rep.alpha * g.c * b - 1.0) <= 4 * kEps);
    } else {
      CHECK(rep.alpha == reports[k - 1].alpha);
    }
  }
}

TEST_CASE("adaptive with n = 1 updates every step") {
  const auto p = make_kepler();
  RunSettings s;
  s.h = 1e-2;
  s.t_end = 0.5;
  std::size_t updates = 0, steps = 0;
  const Observer obs = [&](const StepInfo& info) {
    ++steps;
    updates += info.report.gain_updated ? 1 : 0;
  };
  (void)adaptive_driver(*p.system, p.lyapunov, p.initial_state, AdaptiveGain{1.1, 1e-10, 1e-3}, s,
                        {&obs, 1});
  CHECK(steps == 50);
  CHECK(updates == 50);
}

TEST_CASE("adaptive gain equals inverse hL with L scaled by c on constant curvature") {
  // Quadratic V: Hessian norm is constant, so the adaptive gain reduces to a fixed gain.
  KeplerSystem k;
  FirstIntegral f;
  f.name = "x";
  f.size = 6;
  f.value = [](std::span<const double> x, std::span<double> out) {
    std::copy(x.begin(), x.end(), out.begin());
  };
  f.jacobian = [](std::span<const double>, std::span<double> j) {
    std::fill(j.begin(), j.end(), 0.0);
    for (int i = 0; i < 6; ++i) j[i * 6 + i] = 1.0;
  };
  const State x0{1, 0, 0, 0, 1, 0};
  const auto v = build_sos_lyapunov(6, {{f, 2.0}}, x0);
  const double hn = v.hess_norm(x0);
  const double h = 1e-3, c = 1.1;
  CHECK(adaptive_gain(v, x0, h, c, 1e-10) ==
        doctest::Approx(resolve_fixed_gain(InverseHLGain{c * hn}, h)).epsilon(4 * kEps));
}

TEST_CASE("adaptive gain is rejected for RK4") {
  const auto p = make_kepler();
  RunSettings s;
  s.h = 1e-3;
  s.t_end = 0.1;
  CHECK_THROWS_AS((void)integrate(*p.system, p.lyapunov, StepMethod::RK4,
                                  GainPolicy{AdaptiveGain{}}, p.initial_state, s),
                  ConfigError);
}

TEST_CASE("Lipschitz probe on the perturbed problem") {
  const auto p = make_perturbed_kepler();
  LipschitzProbeOptions o;
  o.window = 200.0;
  const auto est = estimate_lipschitz(*p.system, p.lyapunov, p.initial_state, o);
  CHECK(est.stride == 100);
  CHECK(est.samples == 1 + 20000);
  CHECK(est.max_norm == doctest::Approx(148.03).epsilon(0.05));
  CHECK(est.min_norm < est.max_norm);
}

TEST_CASE("Lipschitz probe errors") {
  const auto p = make_kepler();
  LipschitzProbeOptions o;
  o.window = 0.0;
  CHECK_THROWS_AS((void)estimate_lipschitz(*p.system, p.lyapunov, p.initial_state, o),
                  ConfigError);
  o.window = 10 * kKeplerPeriod;
  o.h_probe = 1e-2;  // unity gain diverges here
  try {
    (void)estimate_lipschitz(*p.system, p.lyapunov, p.initial_state, o);
    FAIL("expected EstimationFailed");
  } catch (const EstimationFailed& e) {
    CHECK(e.partial_max() > 0.0);
  }
}
