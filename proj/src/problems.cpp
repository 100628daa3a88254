#include "fbi/problems.hpp"

#include <cmath>

#include "fbi/errors.hpp"

namespace fbi {

Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Mat3 hat(const Vec3& a) noexcept {
  return {0.0, -a[2], a[1],  //
          a[2], 0.0, -a[0],  //
          -a[1], a[0], 0.0};
}

double det3(std::span<const double, 9> m) noexcept {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

// ---------------------------------------------------------------------------
// Free rigid body

namespace {

Vec3 omega_of(std::span<const double> x) { return {x[9], x[10], x[11]}; }

}  // namespace

RigidBodySystem::RigidBodySystem(const Vec3& inertia) : inertia_(inertia) {
  for (double v : inertia_) {
    if (!(v > 0.0)) throw ConfigError("inertia must be positive diagonal");
  }
  const Vec3 in = inertia_;

  FirstIntegral energy;
  energy.name = "E";
  energy.size = 1;
  energy.value = [in](std::span<const double> x, std::span<double> out) {
    out[0] = 0.5 * (in[0] * x[9] * x[9] + in[1] * x[10] * x[10] + in[2] * x[11] * x[11]);
  };
  energy.jacobian = [in](std::span<const double> x, std::span<double> jac) {
    std::fill(jac.begin(), jac.end(), 0.0);
    for (int i = 0; i < 3; ++i) jac[9 + i] = in[i] * x[9 + i];
  };

  FirstIntegral momentum;
  momentum.name = "pi";
  momentum.size = 3;
  momentum.value = [in](std::span<const double> x, std::span<double> out) {
    for (int i = 0; i < 3; ++i) {
      out[i] = x[3 * i] * in[0] * x[9] + x[3 * i + 1] * in[1] * x[10] +
               x[3 * i + 2] * in[2] * x[11];
    }
  };
  momentum.jacobian = [in](std::span<const double> x, std::span<double> jac) {
    std::fill(jac.begin(), jac.end(), 0.0);
    for (int i = 0; i < 3; ++i) {
      double* row = jac.data() + i * kDim;
      for (int j = 0; j < 3; ++j) {
        row[3 * i + j] = in[j] * x[9 + j];  // d pi_i / d R_ij
        row[9 + j] = x[3 * i + j] * in[j];  // d pi_i / d Omega_j
      }
    }
  };

  integrals_ = {std::move(energy), std::move(momentum)};
}

void RigidBodySystem::field(std::span<const double> x, std::span<double> dxdt) const {
  if (!in_domain(x)) throw DomainExit("det(R) <= 0");
  const Vec3 w = omega_of(x);
  const Mat3 w_hat = hat(w);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += x[3 * i + k] * w_hat[3 * k + j];
      dxdt[3 * i + j] = s;
    }
  }
  const Vec3 iw{inertia_[0] * w[0], inertia_[1] * w[1], inertia_[2] * w[2]};
  const Vec3 c = cross(iw, w);
  for (int i = 0; i < 3; ++i) dxdt[9 + i] = c[i] / inertia_[i];
}

bool RigidBodySystem::in_domain(std::span<const double> x) const {
  return det3(x.first<9>()) > 0.0;
}

std::vector<Monitor> RigidBodySystem::monitors() const {
  auto out = DynamicalSystem::monitors();
  out.push_back({"orth", 9, [](std::span<const double> x, std::span<double> d) {
                   for (int i = 0; i < 3; ++i) {
                     for (int j = 0; j < 3; ++j) {
                       double s = 0.0;
                       for (int k = 0; k < 3; ++k) s += x[3 * k + i] * x[3 * k + j];
                       d[3 * i + j] = s - (i == j ? 1.0 : 0.0);
                     }
                   }
                 }});
  return out;
}

double RigidBodySystem::energy(std::span<const double> x) const {
  return integrals_[0].eval(x)[0];
}

Vec3 RigidBodySystem::spatial_momentum(std::span<const double> x) const {
  const auto p = integrals_[1].eval(x);
  return {p[0], p[1], p[2]};
}

State rigid_body_field(std::span<const double> x, const Vec3& inertia) {
  return RigidBodySystem(inertia).field(x);
}

// ---------------------------------------------------------------------------
// Central-force family

namespace {

double radius(std::span<const double> x) {
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

void check_radius(double r) {
  if (!(r >= CentralForceSystem::kCollisionRadius)) {
    throw DomainExit("|x| below collision radius");
  }
}

FirstIntegral angular_momentum_integral() {
  FirstIntegral l;
  l.name = "L";
  l.size = 3;
  l.value = [](std::span<const double> s, std::span<double> out) {
    out[0] = s[1] * s[5] - s[2] * s[4];
    out[1] = s[2] * s[3] - s[0] * s[5];
    out[2] = s[0] * s[4] - s[1] * s[3];
  };
  // d(x cross v)/dx = -hat(v), d(x cross v)/dv = hat(x)
  l.jacobian = [](std::span<const double> s, std::span<double> jac) {
    const Mat3 hv = hat({s[3], s[4], s[5]});
    const Mat3 hx = hat({s[0], s[1], s[2]});
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        jac[i * 6 + j] = -hv[3 * i + j];
        jac[i * 6 + 3 + j] = hx[3 * i + j];
      }
    }
  };
  return l;
}

}  // namespace

CentralForceSystem::CentralForceSystem(double mu, double delta) : mu_(mu), delta_(delta) {
  if (!(mu > 0.0)) throw ConfigError("mu must be positive");
  if (!(delta >= 0.0)) throw ConfigError("delta must be nonnegative");
}

double CentralForceSystem::potential(double r) const noexcept {
  return -mu_ / r - delta_ / (r * r * r);
}

double CentralForceSystem::energy(std::span<const double> x) const {
  const double v2 = x[3] * x[3] + x[4] * x[4] + x[5] * x[5];
  return 0.5 * v2 + potential(radius(x));
}

void CentralForceSystem::acceleration(std::span<const double, 3> p,
                                      std::span<double, 3> a) const {
  const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  check_radius(r);
  // U'(r)/r = mu/r^3 + 3 delta/r^5; delta = 0 gives the Kepler form bit for bit.
  const double r3 = r * r * r;
  const double scale = mu_ / r3 + 3.0 * delta_ / (r3 * r * r);
  for (int i = 0; i < 3; ++i) a[i] = -scale * p[i];
}

void CentralForceSystem::field(std::span<const double> x, std::span<double> dxdt) const {
  dxdt[0] = x[3];
  dxdt[1] = x[4];
  dxdt[2] = x[5];
  acceleration(x.first<3>(), dxdt.subspan<3, 3>());
}

bool CentralForceSystem::in_domain(std::span<const double> x) const {
  return radius(x) >= kCollisionRadius;
}

KeplerSystem::KeplerSystem(double mu) : CentralForceSystem(mu, 0.0) {
  FirstIntegral lrl;
  lrl.name = "A";
  lrl.size = 3;
  lrl.value = [mu](std::span<const double> s, std::span<double> out) {
    const auto a = laplace_runge_lenz(s, mu);
    std::copy(a.begin(), a.end(), out.begin());
  };
  // A = x |v|^2 - v (x.v) - mu x / r
  lrl.jacobian = [mu](std::span<const double> s, std::span<double> jac) {
    const double x[3] = {s[0], s[1], s[2]};
    const double v[3] = {s[3], s[4], s[5]};
    const double r = radius(s);
    const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    const double xv = x[0] * v[0] + x[1] * v[1] + x[2] * v[2];
    const double r3 = r * r * r;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double eye = i == j ? 1.0 : 0.0;
        jac[i * 6 + j] = v2 * eye - v[i] * v[j] - mu * (eye / r - x[i] * x[j] / r3);
        jac[i * 6 + 3 + j] = 2.0 * x[i] * v[j] - xv * eye - v[i] * x[j];
      }
    }
  };
  integrals_ = {angular_momentum_integral(), std::move(lrl)};
}

PerturbedKeplerSystem::PerturbedKeplerSystem(double mu, double delta)
    : CentralForceSystem(mu, delta) {
  FirstIntegral energy;
  energy.name = "E";
  energy.size = 1;
  energy.value = [mu, delta](std::span<const double> s, std::span<double> out) {
    const double r = radius(s);
    out[0] = 0.5 * (s[3] * s[3] + s[4] * s[4] + s[5] * s[5]) - mu / r - delta / (r * r * r);
  };
  energy.jacobian = [mu, delta](std::span<const double> s, std::span<double> jac) {
    const double r = radius(s);
    const double r3 = r * r * r;
    const double scale = mu / r3 + 3.0 * delta / (r3 * r * r);  // U'(r)/r
    for (int i = 0; i < 3; ++i) {
      jac[i] = scale * s[i];
      jac[3 + i] = s[3 + i];
    }
  };
  integrals_ = {std::move(energy), angular_momentum_integral()};
}

State kepler_field(std::span<const double> x, double mu) { return KeplerSystem(mu).field(x); }

State perturbed_kepler_field(std::span<const double> x, double mu, double delta) {
  return PerturbedKeplerSystem(mu, delta).field(x);
}

Vec3 angular_momentum(std::span<const double> s) {
  return cross({s[0], s[1], s[2]}, {s[3], s[4], s[5]});
}

Vec3 laplace_runge_lenz(std::span<const double> s, double mu) {
  const Vec3 x{s[0], s[1], s[2]};
  const Vec3 v{s[3], s[4], s[5]};
  const double r = radius(s);
  check_radius(r);
  const Vec3 vxl = cross(v, cross(x, v));
  return {vxl[0] - mu * x[0] / r, vxl[1] - mu * x[1] / r, vxl[2] - mu * x[2] / r};
}

// ---------------------------------------------------------------------------
// Problem presets

Problem make_rigid_body(const RigidBodyWeights& weights) {
  auto system = std::make_shared<const RigidBodySystem>();
  State x0{1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0};
  const auto& ints = system->integrals();
  auto lyapunov = build_sos_lyapunov(
      RigidBodySystem::kDim, {{ints[0], weights.energy}, {ints[1], weights.momentum}}, x0,
      orthogonality_penalty(0, weights.orthogonality));
  Problem p{"rigid_body", system, std::move(lyapunov), std::move(x0)};
  p.lipschitz = 1986.0;
  p.t_update = 30.0;
  p.horizon = 1000.0;
  p.desk_horizon = 100.0;
  p.probe_window = 30.0;
  return p;
}

Problem make_kepler(const KeplerWeights& weights) {
  auto system = std::make_shared<const KeplerSystem>(1.0);
  State x0{1.0, 0.0, 0.0, 0.0, std::sqrt(1.8), 0.0};
  const auto& ints = system->integrals();
  auto lyapunov = build_sos_lyapunov(
      CentralForceSystem::kDim, {{ints[0], weights.angular_momentum}, {ints[1], weights.lrl}},
      x0);
  Problem p{"kepler", system, std::move(lyapunov), std::move(x0)};
  p.lipschitz = 515.4;
  p.t_update = 0.1;
  p.horizon = 1000.0 * kKeplerPeriod;
  p.desk_horizon = 10.0 * kKeplerPeriod;
  p.period = kKeplerPeriod;
  p.probe_window = kKeplerPeriod;
  return p;
}

Problem make_perturbed_kepler(const PerturbedKeplerWeights& weights) {
  auto system = std::make_shared<const PerturbedKeplerSystem>(1.0, 0.0025);
  State x0{0.4, 0.0, 0.0, 0.0, 2.0, 0.0};
  const auto& ints = system->integrals();
  auto lyapunov = build_sos_lyapunov(
      CentralForceSystem::kDim,
      {{ints[0], weights.energy}, {ints[1], weights.angular_momentum}}, x0);
  Problem p{"perturbed_kepler", system, std::move(lyapunov), std::move(x0)};
  p.lipschitz = 148.03;
  p.t_update = 0.1;
  p.horizon = 200.0;
  p.desk_horizon = 200.0;
  p.probe_window = 200.0;
  return p;
}

Problem make_problem(std::string_view name) {
  if (name == "rigid_body") return make_rigid_body();
  if (name == "kepler") return make_kepler();
  if (name == "perturbed_kepler") return make_perturbed_kepler();
  throw ConfigError("unknown problem '" + std::string(name) + "'");
}

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"rigid_body", "kepler", "perturbed_kepler"};
  return names;
}

}  // namespace fbi
