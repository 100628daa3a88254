#include "fbi/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fbi/errors.hpp"

namespace fbi {
namespace {

// Scratch for one integral term: value (m) and Jacobian (m x n). Small terms stay on the stack.
class TermScratch {
 public:
  TermScratch(std::size_t m, std::size_t n) : m_(m), n_(n) {
    if (m * (n + 1) > stack_.size()) heap_.resize(m * (n + 1));
  }
  std::span<double> value() { return buffer().subspan(0, m_); }
  std::span<double> jacobian() { return buffer().subspan(m_, m_ * n_); }

 private:
  std::span<double> buffer() {
    if (heap_.empty()) return {stack_.data(), m_ * (n_ + 1)};
    return heap_;
  }
  std::size_t m_, n_;
  std::array<double, 256> stack_{};
  std::vector<double> heap_;
};

}  // namespace

LyapunovFunction::LyapunovFunction(std::size_t dim, std::vector<WeightedIntegral> terms,
                                   std::vector<std::vector<double>> reference,
                                   std::optional<Penalty> penalty)
    : dim_(dim),
      terms_(std::move(terms)),
      reference_(std::move(reference)),
      penalty_(std::move(penalty)) {
  if (dim_ == 0) throw ConfigError("Lyapunov function dimension must be positive");
  if (reference_.size() != terms_.size()) {
    throw ConfigError("one reference value per integral term is required");
  }
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    if (!(terms_[j].weight > 0.0) || !std::isfinite(terms_[j].weight)) {
      throw ConfigError("weight for '" + terms_[j].integral.name + "' must be positive");
    }
    if (reference_[j].size() != terms_[j].integral.size) {
      throw ConfigError("reference size mismatch for '" + terms_[j].integral.name + "'");
    }
    max_term_size_ = std::max(max_term_size_, terms_[j].integral.size);
  }
}

double LyapunovFunction::value(std::span<const double> x) const {
  double total = 0.0;
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const auto& term = terms_[j];
    TermScratch scratch(term.integral.size, dim_);
    auto f = scratch.value();
    term.integral.value(x, f);
    double sq = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double d = f[i] - reference_[j][i];
      sq += d * d;
    }
    total += 0.5 * term.weight * sq;
  }
  if (penalty_) total += penalty_->value(x);
  return total;
}

void LyapunovFunction::gradient(std::span<const double> x, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const auto& term = terms_[j];
    const std::size_t m = term.integral.size;
    TermScratch scratch(m, dim_);
    auto f = scratch.value();
    auto jac = scratch.jacobian();
    term.integral.value(x, f);
    term.integral.jacobian(x, jac);
    // k J^T (F - F_ref)
    for (std::size_t r = 0; r < m; ++r) {
      const double d = term.weight * (f[r] - reference_[j][r]);
      if (d == 0.0) continue;
      const double* row = jac.data() + r * dim_;
      for (std::size_t c = 0; c < dim_; ++c) grad[c] += d * row[c];
    }
  }
  if (penalty_) penalty_->add_gradient(x, grad);
}

State LyapunovFunction::gradient(std::span<const double> x) const {
  State g(dim_);
  gradient(x, g);
  return g;
}

double LyapunovFunction::hess_norm(std::span<const double> x, HessianNorm kind) const {
  return kind == HessianNorm::Frobenius ? hess_norm_frobenius(*this, x)
                                        : hess_norm_spectral(*this, x);
}

LyapunovFunction build_sos_lyapunov(std::size_t dim, std::vector<WeightedIntegral> terms,
                                    std::span<const double> x_initial,
                                    std::optional<Penalty> penalty) {
  if (x_initial.size() != dim) throw ConfigError("initial state has wrong dimension");
  std::vector<std::vector<double>> reference;
  reference.reserve(terms.size());
  for (const auto& term : terms) {
    if (!(term.weight > 0.0)) {
      throw ConfigError("weight for '" + term.integral.name + "' must be positive");
    }
    reference.push_back(term.integral.eval(x_initial));
  }
  return LyapunovFunction(dim, std::move(terms), std::move(reference), std::move(penalty));
}

OrthogonalityTerm orthogonality_penalty(std::span<const double, 9> r, double k0) {
  // D = R^T R - I
  std::array<double, 9> d{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += r[k * 3 + i] * r[k * 3 + j];
      d[i * 3 + j] = s - (i == j ? 1.0 : 0.0);
    }
  }
  OrthogonalityTerm out;
  double sq = 0.0;
  for (double v : d) sq += v * v;
  out.value = 0.25 * k0 * sq;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += r[i * 3 + k] * d[k * 3 + j];
      out.gradient[i * 3 + j] = k0 * s;
    }
  }
  return out;
}

Penalty orthogonality_penalty(std::size_t offset, double k0) {
  if (!(k0 > 0.0)) throw ConfigError("orthogonality weight must be positive");
  Penalty p;
  p.name = "orth";
  p.value = [offset, k0](std::span<const double> x) {
    return orthogonality_penalty(x.subspan(offset).first<9>(), k0).value;
  };
  p.add_gradient = [offset, k0](std::span<const double> x, std::span<double> grad) {
    const auto term = orthogonality_penalty(x.subspan(offset).first<9>(), k0);
    for (std::size_t i = 0; i < 9; ++i) grad[offset + i] += term.gradient[i];
  };
  return p;
}

double fd_step(double xi) noexcept {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * std::max(1.0, std::abs(xi));
}

std::vector<double> finite_difference_hessian(const LyapunovFunction& lyapunov,
                                              std::span<const double> x) {
  const std::size_t n = lyapunov.dim();
  std::vector<double> h(n * n);
  State xp(x.begin(), x.end());
  State gp(n), gm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = fd_step(x[i]);
    xp[i] = x[i] + d;
    lyapunov.gradient(xp, gp);
    xp[i] = x[i] - d;
    lyapunov.gradient(xp, gm);
    xp[i] = x[i];
    for (std::size_t r = 0; r < n; ++r) {
      const double v = (gp[r] - gm[r]) / (2.0 * d);
      if (!std::isfinite(v)) throw HessianEvaluationError("non-finite Hessian entry");
      h[r * n + i] = v;
    }
  }
  return h;
}

State finite_difference_gradient(const LyapunovFunction& lyapunov, std::span<const double> x) {
  const std::size_t n = lyapunov.dim();
  State g(n);
  State xp(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double d = fd_step(x[i]);
    xp[i] = x[i] + d;
    const double vp = lyapunov.value(xp);
    xp[i] = x[i] - d;
    const double vm = lyapunov.value(xp);
    xp[i] = x[i];
    g[i] = (vp - vm) / (2.0 * d);
  }
  return g;
}

std::vector<double> symmetrized(std::span<const double> m, std::size_t n) {
  std::vector<double> s(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) s[i * n + j] = 0.5 * (m[i * n + j] + m[j * n + i]);
  }
  return s;
}

double frobenius_norm(std::span<const double> m) noexcept {
  double s = 0.0;
  for (double v : m) s += v * v;
  return std::sqrt(s);
}

double spectral_norm_power(std::span<const double> m, std::size_t n, int iterations) {
  // Power iteration on M^T M from a fixed start vector, so repeated calls agree exactly.
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> mv(n), w(n);
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += m[i * n + j] * v[j];
      mv[i] = s;
    }
    estimate = norm2(mv);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += m[i * n + j] * mv[i];
      w[j] = s;
    }
    const double wn = norm2(w);
    if (wn == 0.0) break;
    for (std::size_t j = 0; j < n; ++j) v[j] = w[j] / wn;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += m[i * n + j] * v[j];
    mv[i] = s;
  }
  return std::max(estimate, norm2(mv));
}

double hess_norm_frobenius(const LyapunovFunction& lyapunov, std::span<const double> x) {
  return frobenius_norm(symmetrized(finite_difference_hessian(lyapunov, x), lyapunov.dim()));
}

double hess_norm_spectral(const LyapunovFunction& lyapunov, std::span<const double> x) {
  const std::size_t n = lyapunov.dim();
  return spectral_norm_power(symmetrized(finite_difference_hessian(lyapunov, x), n), n);
}

}  // namespace fbi
