#pragma once

// Weyl operators and the Weyl channel family: depolarizing, q-c, phase
// damping and the conditional expectation onto the Fourier-diagonal algebra.

#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "superadd/operator_core.hpp"

namespace superadd {

namespace tol {
inline constexpr double kTracePreserving = 1e-10;
inline constexpr double kWeightSlack = 1e-12;
inline constexpr double kUnitaryInput = 1e-10;
}  // namespace tol

/// Sink for non-fatal diagnostics. Defaults to stderr.
using WarningSink = std::function<void(std::string_view)>;

inline void warn_stderr(std::string_view msg) { std::cerr << "warning: " << msg << '\n'; }

// ---------------------------------------------------------------------------
// Weyl operators

inline complex root_of_unity(int d, long long power) {
  const long long e = ((power % d) + d) % d;
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(d);
  return {std::cos(angle), std::sin(angle)};
}

/// W_{m,n} = sum_k w^{kn} |k+m mod d><k|, w = exp(2 pi i / d).
inline ComplexMatrix weyl_operator(int d, int m, int n) {
  if (d < 1) throw invalid_input("weyl_operator: d must be positive");
  if (m < 0 || m >= d || n < 0 || n >= d) {
    throw invalid_input("weyl_operator: indices (" + std::to_string(m) + "," + std::to_string(n) +
                        ") outside [0," + std::to_string(d - 1) + "]");
  }
  ComplexMatrix w = ComplexMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) w((k + m) % d, k) = root_of_unity(d, static_cast<long long>(k) * n);
  return w;
}

// ---------------------------------------------------------------------------
// Channels

class ChoiMatrix;

/// Completely positive trace-preserving map held as a Kraus list.
class QuantumChannel {
 public:
  /// Rejects empty lists, inconsistent shapes and trace-preservation defects
  /// above 1e-10.
  explicit QuantumChannel(std::vector<ComplexMatrix> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw invalid_input("QuantumChannel: empty Kraus list");
    dim_out_ = static_cast<int>(kraus_.front().rows());
    dim_in_ = static_cast<int>(kraus_.front().cols());
    if (dim_in_ < 1 || dim_out_ < 1) throw invalid_input("QuantumChannel: empty Kraus operator");
    for (const auto& k : kraus_) {
      if (k.rows() != dim_out_ || k.cols() != dim_in_) {
        throw dimension_mismatch("QuantumChannel: Kraus operators have differing shapes");
      }
      if (!all_finite(k)) throw invalid_input("QuantumChannel: non-finite Kraus entry");
    }
    const double defect = tp_defect();
    if (defect > tol::kTracePreserving) {
      throw invalid_input("QuantumChannel: not trace preserving (defect " + std::to_string(defect) + ")");
    }
  }

  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }

  /// max |sum K^dagger K - I|.
  double tp_defect() const {
    ComplexMatrix s = ComplexMatrix::Zero(dim_in_, dim_in_);
    for (const auto& k : kraus_) s.noalias() += k.adjoint() * k;
    return max_abs_entry(s - ComplexMatrix::Identity(dim_in_, dim_in_));
  }

  /// Linear action on an arbitrary operator.
  ComplexMatrix apply(const ComplexMatrix& x) const {
    if (x.rows() != dim_in_ || x.cols() != dim_in_) {
      throw dimension_mismatch("QuantumChannel::apply: input is " + std::to_string(x.rows()) +
                               "-dimensional, channel expects " + std::to_string(dim_in_));
    }
    ComplexMatrix out = ComplexMatrix::Zero(dim_out_, dim_out_);
    for (const auto& k : kraus_) out.noalias() += k * x * k.adjoint();
    return out;
  }

  DensityMatrix apply(const DensityMatrix& rho) const { return DensityMatrix(apply(rho.matrix())); }

 private:
  std::vector<ComplexMatrix> kraus_;
  int dim_in_ = 0;
  int dim_out_ = 0;
};

inline QuantumChannel identity_channel(int d) {
  return QuantumChannel({ComplexMatrix::Identity(d, d)});
}

/// Unitary conjugation x -> U x U^dagger.
inline QuantumChannel unitary_channel(const ComplexMatrix& u) {
  if (unitarity_defect(u) > tol::kUnitaryInput) throw invalid_input("unitary_channel: not unitary");
  return QuantumChannel({u});
}

/// J = (Phi (x) Id)(|Omega><Omega|), |Omega> = d^{-1/2} sum_k |kk>.
/// Output factor first, reference second.
class ChoiMatrix {
 public:
  explicit ChoiMatrix(const QuantumChannel& ch) : dim_in_(ch.dim_in()), dim_out_(ch.dim_out()) {
    const int din = dim_in_;
    ComplexVector omega = ComplexVector::Zero(static_cast<Eigen::Index>(din) * din);
    for (int k = 0; k < din; ++k) omega(k * din + k) = 1.0 / std::sqrt(static_cast<double>(din));
    mat_ = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim_out_) * din,
                               static_cast<Eigen::Index>(dim_out_) * din);
    const ComplexMatrix id = ComplexMatrix::Identity(din, din);
    for (const auto& k : ch.kraus()) {
      const ComplexVector v = tensor(k, id) * omega;
      mat_.noalias() += v * v.adjoint();
    }
  }

  const ComplexMatrix& matrix() const { return mat_; }
  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  double min_eigenvalue() const { return min_hermitian_eigenvalue(mat_); }

  /// Entrywise sup distance; the certificate used for every map equality.
  double distance(const ChoiMatrix& other) const {
    if (dim_in_ != other.dim_in_ || dim_out_ != other.dim_out_) {
      throw dimension_mismatch("ChoiMatrix::distance: channel dimensions differ");
    }
    return max_abs_diff(mat_, other.mat_);
  }

 private:
  int dim_in_;
  int dim_out_;
  ComplexMatrix mat_;
};

inline ChoiMatrix choi(const QuantumChannel& ch) { return ChoiMatrix(ch); }

inline double choi_distance(const QuantumChannel& a, const QuantumChannel& b) {
  return choi(a).distance(choi(b));
}

/// Kraus products {K_o K_i}: x -> outer(inner(x)).
inline QuantumChannel compose(const QuantumChannel& outer, const QuantumChannel& inner) {
  if (outer.dim_in() != inner.dim_out()) {
    throw dimension_mismatch("compose: outer input dimension " + std::to_string(outer.dim_in()) +
                             " != inner output dimension " + std::to_string(inner.dim_out()));
  }
  std::vector<ComplexMatrix> ks;
  ks.reserve(outer.kraus().size() * inner.kraus().size());
  for (const auto& ko : outer.kraus())
    for (const auto& ki : inner.kraus()) ks.push_back(ko * ki);
  return QuantumChannel(std::move(ks));
}

inline QuantumChannel tensor_channels(const QuantumChannel& a, const QuantumChannel& b) {
  std::vector<ComplexMatrix> ks;
  ks.reserve(a.kraus().size() * b.kraus().size());
  for (const auto& ka : a.kraus())
    for (const auto& kb : b.kraus()) ks.push_back(tensor(ka, kb));
  return QuantumChannel(std::move(ks));
}

inline DensityMatrix apply(const QuantumChannel& ch, const DensityMatrix& rho) { return ch.apply(rho); }

/// Convex combination of channels with equal dimensions; Kraus operators are
/// rescaled by sqrt(weight).
inline QuantumChannel mixture(const std::vector<std::pair<double, const QuantumChannel*>>& terms) {
  std::vector<ComplexMatrix> ks;
  for (const auto& [w, ch] : terms) {
    if (w < 0.0) throw invalid_input("mixture: negative weight");
    if (w == 0.0) continue;
    for (const auto& k : ch->kraus()) ks.push_back(std::sqrt(w) * k);
  }
  return QuantumChannel(std::move(ks));
}

/// Equivalent channel with at most dim_in*dim_out Kraus operators, read off the
/// Choi eigendecomposition. Eigenvalues below `cutoff` are dropped.
inline QuantumChannel minimal_kraus(const QuantumChannel& ch, double cutoff = 1e-14) {
  const int din = ch.dim_in();
  const int dout = ch.dim_out();
  const auto spec = hermitian_eig(choi(ch).matrix());
  std::vector<ComplexMatrix> ks;
  for (Eigen::Index i = spec.eigenvalues.size() - 1; i >= 0; --i) {
    const double lam = spec.eigenvalues(i);
    if (lam <= cutoff) break;
    // J = (1/din) sum vec(K) vec(K)^dagger with vec index (out*din + in).
    const ComplexVector v = std::sqrt(lam * din) * spec.eigenvectors.col(i);
    ComplexMatrix k(dout, din);
    for (int a = 0; a < dout; ++a)
      for (int b = 0; b < din; ++b) k(a, b) = v(a * din + b);
    ks.push_back(std::move(k));
  }
  return QuantumChannel(std::move(ks));
}

// ---------------------------------------------------------------------------
// The Weyl family

/// Phi(x) = (1-(d-1)(r+dp)) x + r sum_{m>=1} W_{m,0} x W_{m,0}^* + p sum_{m, n>=1} W_{m,n} x W_{m,n}^*.
struct WeylParams {
  int d = 2;
  double r = 0.0;
  double p = 0.0;

  double identity_weight() const { return 1.0 - (d - 1) * (r + d * p); }
  /// Depolarizing parameter of the dep component: q_dep = d^2 p.
  double q_dep() const { return static_cast<double>(d) * d * p; }
};

inline void validate(const WeylParams& w) {
  if (w.d < 2) throw invalid_input("WeylParams: d must be at least 2");
  if (!(w.r >= 0.0) || !(w.p >= 0.0) || !std::isfinite(w.r) || !std::isfinite(w.p)) {
    throw invalid_input("WeylParams: r and p must be finite and nonnegative");
  }
  if ((w.d - 1) * (w.r + w.d * w.p) > 1.0 + tol::kWeightSlack) {
    throw invalid_input("WeylParams: weight constraint (d-1)(r+dp) <= 1 violated: (d-1)(r+dp) = " +
                        std::to_string((w.d - 1) * (w.r + w.d * w.p)));
  }
}

inline QuantumChannel weyl_channel(const WeylParams& w) {
  validate(w);
  const int d = w.d;
  std::vector<ComplexMatrix> ks;
  const double w0 = std::max(0.0, w.identity_weight());
  if (w0 > 0.0) ks.push_back(std::sqrt(w0) * ComplexMatrix::Identity(d, d));
  if (w.r > 0.0)
    for (int m = 1; m < d; ++m) ks.push_back(std::sqrt(w.r) * weyl_operator(d, m, 0));
  if (w.p > 0.0)
    for (int m = 0; m < d; ++m)
      for (int n = 1; n < d; ++n) ks.push_back(std::sqrt(w.p) * weyl_operator(d, m, n));
  return QuantumChannel(std::move(ks));
}

inline double depolarizing_q_max(int d) {
  const double d2 = static_cast<double>(d) * d;
  return d2 / (d2 - 1.0);
}

/// Phi(x) = (1-q) x + (q/d) Tr(x) I, realized as the Weyl channel r = p = q/d^2.
/// Accepts the full CP range [0, d^2/(d^2-1)]; q > 1 is reported to `warn`.
inline QuantumChannel depolarizing(int d, double q, const WarningSink& warn = warn_stderr) {
  if (d < 2) throw invalid_input("depolarizing: d must be at least 2");
  const double qmax = depolarizing_q_max(d);
  if (!(q >= 0.0) || q > qmax + tol::kWeightSlack) {
    throw invalid_input("depolarizing: q=" + std::to_string(q) + " outside CP range [0, " +
                        std::to_string(qmax) + "]");
  }
  if (q > 1.0 && warn) warn("depolarizing parameter q > 1 (CP but not a convex mixture with the identity)");
  const double pr = std::min(q, qmax) / (static_cast<double>(d) * d);
  return weyl_channel({d, pr, pr});
}

/// Closed-form minimal output entropy of the depolarizing channel, in bits.
inline double chi_dep_closed_form(int d, double q) {
  if (d < 2) throw invalid_input("chi_dep_closed_form: d must be at least 2");
  if (!(q >= 0.0) || q > depolarizing_q_max(d) + tol::kWeightSlack) {
    throw invalid_input("chi_dep_closed_form: q outside CP range");
  }
  const double major = 1.0 - (d - 1) * q / d;
  const double minor = q / d;
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log2(x) : 0.0; };
  return -xlogx(major) - (d - 1) * xlogx(minor);
}

/// E(x) = (1/d) sum_m W_{m,0} x W_{m,0}^*.
inline QuantumChannel conditional_expectation(int d) {
  if (d < 2) throw invalid_input("conditional_expectation: d must be at least 2");
  std::vector<ComplexMatrix> ks;
  for (int m = 0; m < d; ++m) ks.push_back(weyl_operator(d, m, 0) / std::sqrt(static_cast<double>(d)));
  return QuantumChannel(std::move(ks));
}

inline double qc_q_max(int d) { return static_cast<double>(d) / (d - 1); }

/// Measure in the Fourier basis (e_j), prepare rho_j with weight 1-(d-1)q/d on
/// e_j and q/d on each other e_{j+k}.
inline QuantumChannel qc_channel(int d, double q) {
  if (d < 2) throw invalid_input("qc_channel: d must be at least 2");
  if (!(q >= 0.0) || q > qc_q_max(d) + tol::kWeightSlack) {
    throw invalid_input("qc_channel: q=" + std::to_string(q) + " outside [0, d/(d-1)]");
  }
  const double c0 = std::max(0.0, 1.0 - (d - 1) * q / d);
  const double ck = q / d;
  // Fourier vectors, column j: d^{-1/2} w^{jk}.
  ComplexMatrix f(d, d);
  for (int k = 0; k < d; ++k)
    for (int j = 0; j < d; ++j) f(k, j) = root_of_unity(d, static_cast<long long>(j) * k) / std::sqrt(double(d));
  std::vector<ComplexMatrix> ks;
  for (int k = 0; k < d; ++k) {
    const double c = k == 0 ? c0 : ck;
    if (c <= 0.0) continue;
    for (int j = 0; j < d; ++j) {
      ks.push_back(std::sqrt(c) * f.col((j + k) % d) * f.col(j).adjoint());
    }
  }
  return QuantumChannel(std::move(ks));
}

/// Xi(x) = ((1+(d-1)l)/d) x + ((1-l)/d) sum_{m>=1} W_{m,0} x W_{m,0}^*.
inline QuantumChannel phase_damping(int d, double lambda) {
  if (d < 2) throw invalid_input("phase_damping: d must be at least 2");
  if (!(lambda >= 0.0) || lambda > 1.0) {
    throw invalid_input("phase_damping: lambda=" + std::to_string(lambda) + " outside [0,1]");
  }
  std::vector<ComplexMatrix> ks;
  ks.push_back(std::sqrt((1.0 + (d - 1) * lambda) / d) * ComplexMatrix::Identity(d, d));
  if (lambda < 1.0) {
    const double c = std::sqrt((1.0 - lambda) / d);
    for (int m = 1; m < d; ++m) ks.push_back(c * weyl_operator(d, m, 0));
  }
  return QuantumChannel(std::move(ks));
}

/// Mixing weight l in Phi = l Phi_dep + (1-l) Phi_qc, both at q_dep = d^2 p:
/// l = 1 - d(r-p)/(1-d^2 p). Requires p <= r <= (1-d(d-1)p)/d.
inline double lambda_for_params(const WeylParams& w) {
  validate(w);
  const int d = w.d;
  const double denom = 1.0 - static_cast<double>(d) * d * w.p;
  const double upper = (1.0 - d * (d - 1) * w.p) / d;
  if (denom <= tol::kWeightSlack || w.r < w.p - tol::kWeightSlack || w.r > upper + tol::kWeightSlack) {
    throw outside_mixture_regime("not in the dep/qc mixture regime: need p <= r <= (1-d(d-1)p)/d with 1-d^2 p > 0");
  }
  return std::clamp(1.0 - d * (w.r - w.p) / denom, 0.0, 1.0);
}

inline bool in_mixture_regime(const WeylParams& w) {
  try {
    (void)lambda_for_params(w);
    return true;
  } catch (const invalid_input&) {
    return false;
  }
}

/// max over seeded random states of max-entry |Phi(U x U^*) - U Phi(x) U^*|.
inline double covariance_defect(const QuantumChannel& ch, const ComplexMatrix& u,
                                std::uint64_t seed = 0x5eed'c0de, int trials = 20) {
  if (u.rows() != ch.dim_in() || u.cols() != ch.dim_in() || ch.dim_in() != ch.dim_out()) {
    throw dimension_mismatch("covariance_defect: unitary dimension does not match channel");
  }
  if (unitarity_defect(u) > tol::kUnitaryInput) throw invalid_input("covariance_defect: u is not unitary");
  RandomStream stream(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const DensityMatrix rho = random_density(ch.dim_in(), ch.dim_in(), stream);
    const ComplexMatrix lhs = ch.apply(ComplexMatrix(u * rho.matrix() * u.adjoint()));
    const ComplexMatrix rhs = u * ch.apply(rho.matrix()) * u.adjoint();
    worst = std::max(worst, max_abs_diff(lhs, rhs));
  }
  return worst;
}

}  // namespace superadd
