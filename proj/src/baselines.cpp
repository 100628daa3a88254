#include "fbi/baselines.hpp"

#include <cmath>

#include "fbi/errors.hpp"

namespace fbi {

bool SplittingScheme::is_symmetric() const noexcept {
  const std::size_t n = axes.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    if (axes[i] != axes[n - 1 - i] || fractions[i] != fractions[n - 1 - i]) return false;
  }
  return true;
}

namespace {

// Rotation by angle theta about coordinate axis `axis`, row-major.
Mat3 axis_rotation(int axis, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  switch (axis) {
    case 0:
      return {1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c};
    case 1:
      return {c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c};
    case 2:
      return {c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0};
    default:
      throw ConfigError("rotation axis must be 0, 1 or 2");
  }
}

}  // namespace

void rigid_body_axis_flow(std::span<double> x, int axis, double t, const Vec3& inertia) {
  if (axis < 0 || axis > 2) throw ConfigError("rotation axis must be 0, 1 or 2");
  if (t == 0.0) return;
  Vec3 pi{inertia[0] * x[9], inertia[1] * x[10], inertia[2] * x[11]};
  const double omega = pi[axis] / inertia[axis];
  const double theta = omega * t;

  // pi <- rot(-theta) pi; only the two components orthogonal to the axis change.
  const Mat3 back = axis_rotation(axis, -theta);
  Vec3 rotated{};
  for (int i = 0; i < 3; ++i) {
    rotated[i] = i == axis ? pi[i]
                           : back[3 * i] * pi[0] + back[3 * i + 1] * pi[1] + back[3 * i + 2] * pi[2];
  }
  for (int i = 0; i < 3; ++i) x[9 + i] = rotated[i] / inertia[i];

  // R <- R rot(+theta)
  const Mat3 fwd = axis_rotation(axis, theta);
  for (int i = 0; i < 3; ++i) {
    const double r0 = x[3 * i], r1 = x[3 * i + 1], r2 = x[3 * i + 2];
    for (int j = 0; j < 3; ++j) {
      x[3 * i + j] = r0 * fwd[j] + r1 * fwd[3 + j] + r2 * fwd[6 + j];
    }
  }
}

void strang_splitting_step(std::span<double> x, double h, const Vec3& inertia,
                           const SplittingScheme& scheme) {
  for (std::size_t i = 0; i < scheme.axes.size(); ++i) {
    rigid_body_axis_flow(x, scheme.axes[i], scheme.fractions[i] * h, inertia);
  }
}

void stormer_verlet_step(std::span<double> x, double h, const Acceleration& accel) {
  std::array<double, 3> a{};
  const double half = 0.5 * h;
  accel(x.first<3>(), a);
  for (int i = 0; i < 3; ++i) x[3 + i] += half * a[i];
  for (int i = 0; i < 3; ++i) x[i] += h * x[3 + i];
  accel(x.first<3>(), a);
  for (int i = 0; i < 3; ++i) x[3 + i] += half * a[i];
}

}  // namespace fbi
