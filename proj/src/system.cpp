#include "fbi/system.hpp"

#include <cmath>

namespace fbi {

std::vector<Monitor> DynamicalSystem::monitors() const {
  std::vector<Monitor> out;
  for (const auto& integral : integrals()) {
    out.push_back({integral.name, integral.size, integral.value});
  }
  return out;
}

VectorField DynamicalSystem::as_field() const {
  return [this](std::span<const double> x, std::span<double> dxdt) { field(x, dxdt); };
}

bool all_finite(std::span<const double> x) noexcept {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> x) noexcept { return std::sqrt(dot(x, x)); }

}  // namespace fbi
