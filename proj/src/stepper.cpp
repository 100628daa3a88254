#include "fbi/stepper.hpp"

#include "fbi/errors.hpp"

namespace fbi {

std::string_view to_string(StepMethod method) noexcept {
  switch (method) {
    case StepMethod::Euler:
      return "euler";
    case StepMethod::RK4:
      return "rk4";
  }
  return "unknown";
}

ExplicitStepper::ExplicitStepper(StepMethod method, std::size_t dim)
    : method_(method), k1_(dim), tmp_(dim) {
  if (method_ == StepMethod::RK4) {
    k2_.resize(dim);
    k3_.resize(dim);
    k4_.resize(dim);
  }
}

void ExplicitStepper::step(const VectorField& field, std::span<double> x, double h) {
  const std::size_t n = x.size();
  if (method_ == StepMethod::Euler) {
    field(x, k1_);
    for (std::size_t i = 0; i < n; ++i) x[i] += h * k1_[i];
    return;
  }
  const double half = 0.5 * h;
  field(x, k1_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];
  field(tmp_, k2_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];
  field(tmp_, k3_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * k3_[i];
  field(tmp_, k4_);
  const double sixth = h / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] += sixth * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }
}

namespace {

State one_step(StepMethod method, const VectorField& field, std::span<const double> x, double h,
               std::size_t step_index) {
  State out(x.begin(), x.end());
  ExplicitStepper stepper(method, out.size());
  stepper.step(field, out, h);
  if (!all_finite(out)) throw DivergedState("non-finite state", step_index);
  return out;
}

}  // namespace

State euler_step(const VectorField& field, std::span<const double> x, double h,
                 std::size_t step_index) {
  return one_step(StepMethod::Euler, field, x, h, step_index);
}

State rk4_step(const VectorField& field, std::span<const double> x, double h,
               std::size_t step_index) {
  return one_step(StepMethod::RK4, field, x, h, step_index);
}

VectorField surrogate_field(const DynamicalSystem& system, const LyapunovFunction& lyapunov,
                            double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("feedback gain must be nonnegative");
  if (alpha == 0.0) return system.as_field();
  return [&system, &lyapunov, alpha, grad = State(system.dim())](
             std::span<const double> x, std::span<double> dxdt) mutable {
    system.field(x, dxdt);
    lyapunov.gradient(x, grad);
    for (std::size_t i = 0; i < dxdt.size(); ++i) dxdt[i] -= alpha * grad[i];
  };
}

}  // namespace fbi
