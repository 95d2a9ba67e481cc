#pragma once

// Numerical estimates of the constrained output-entropy roof
//
//   H_Phi(sigma) = min { sum_j p_j S(Phi(rho_j)) : sum_j p_j rho_j = sigma }
//
// and of the minimal output entropy chi(Phi) = min_rho S(Phi(rho)).
//
// Decompositions of sigma are parametrized by Stiefel points: with
// sigma = sum_i l_i |v_i><v_i| (rank r) and a k x r isometry M, the vectors
// psi_j = sum_i M_{j,i} sqrt(l_i) |v_i> give every pure-state ensemble of
// size k averaging to sigma. The objective is minimized with cyclic sweeps of
// two-row complex Givens rotations, each rotation picked by a coarse scan
// followed by golden-section searches in the angle and the phase. Results are
// upper estimates; nothing here certifies global optimality.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "superadd/operator_core.hpp"
#include "superadd/parallel.hpp"
#include "superadd/weyl_channels.hpp"

namespace superadd {

namespace tol {
inline constexpr double kRankCutoff = 1e-12;
inline constexpr double kDroppedWeight = 1e-14;
inline constexpr double kStiefel = 1e-10;
inline constexpr double kEnsembleWeights = 1e-10;
}  // namespace tol

// ---------------------------------------------------------------------------
// Ensembles

struct Ensemble {
  std::vector<double> weights;
  std::vector<DensityMatrix> states;

  std::size_t size() const { return weights.size(); }
  int dim() const { return states.empty() ? 0 : states.front().dim(); }

  ComplexMatrix average() const {
    ComplexMatrix avg = ComplexMatrix::Zero(dim(), dim());
    for (std::size_t j = 0; j < size(); ++j) avg += weights[j] * states[j].matrix();
    return avg;
  }
};

/// Checks positive weights summing to one, equal dimensions, and a valid average.
inline Ensemble make_ensemble(std::vector<double> weights, std::vector<DensityMatrix> states) {
  if (weights.empty() || weights.size() != states.size()) {
    throw invalid_input("Ensemble: weights and states must be non-empty and of equal length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw invalid_input("Ensemble: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > tol::kEnsembleWeights) throw invalid_input("Ensemble: weights do not sum to 1");
  for (const auto& s : states) {
    if (s.dim() != states.front().dim()) throw dimension_mismatch("Ensemble: states have different dimensions");
  }
  Ensemble e{std::move(weights), std::move(states)};
  (void)DensityMatrix(e.average());
  return e;
}

/// k x r matrix with orthonormal columns.
class StiefelPoint {
 public:
  explicit StiefelPoint(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() < m_.cols() || m_.cols() < 1) {
      throw invalid_input("StiefelPoint: need k >= r >= 1, got " + std::to_string(m_.rows()) + "x" +
                          std::to_string(m_.cols()));
    }
    const double defect = max_abs_entry(m_.adjoint() * m_ - ComplexMatrix::Identity(m_.cols(), m_.cols()));
    if (defect > tol::kStiefel) {
      throw invalid_input("StiefelPoint: columns not orthonormal (defect " + std::to_string(defect) + ")");
    }
  }

  int k() const { return static_cast<int>(m_.rows()); }
  int r() const { return static_cast<int>(m_.cols()); }
  const ComplexMatrix& matrix() const { return m_; }

  /// First r columns of a Haar-random k x k unitary.
  static StiefelPoint random(int k, int r, RandomStream& stream) {
    return StiefelPoint(haar_unitary(k, stream).leftCols(r));
  }

  /// Identity block on top, zero rows below: the eigenbasis ensemble.
  static StiefelPoint identity(int k, int r) {
    ComplexMatrix m = ComplexMatrix::Zero(k, r);
    m.topRows(r).setIdentity();
    return StiefelPoint(std::move(m));
  }

 private:
  ComplexMatrix m_;
};

/// sigma = F F^dagger with F = V sqrt(L) restricted to eigenvalues > 1e-12.
struct SpectralFactor {
  ComplexMatrix factor;  // d x r
  int rank() const { return static_cast<int>(factor.cols()); }
};

inline SpectralFactor spectral_factor(const DensityMatrix& sigma) {
  const auto spec = hermitian_eig(sigma.matrix());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = spec.eigenvalues.size() - 1; i >= 0; --i)
    if (spec.eigenvalues(i) > tol::kRankCutoff) keep.push_back(i);
  SpectralFactor f;
  f.factor.resize(sigma.dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    f.factor.col(static_cast<Eigen::Index>(c)) =
        std::sqrt(spec.eigenvalues(keep[c])) * spec.eigenvectors.col(keep[c]);
  }
  return f;
}

inline int numerical_rank(const DensityMatrix& sigma) { return spectral_factor(sigma).rank(); }

namespace detail {

inline Ensemble ensemble_from_factor(const SpectralFactor& f, const ComplexMatrix& m) {
  std::vector<double> weights;
  std::vector<DensityMatrix> states;
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    const ComplexVector psi = f.factor * m.row(j).transpose();
    const double w = psi.squaredNorm();
    if (w < tol::kDroppedWeight) continue;
    weights.push_back(w);
    states.push_back(DensityMatrix::pure(psi));
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return Ensemble{std::move(weights), std::move(states)};
}

}  // namespace detail

inline Ensemble ensemble_from_stiefel(const DensityMatrix& sigma, const StiefelPoint& m) {
  const SpectralFactor f = spectral_factor(sigma);
  if (m.r() != f.rank()) {
    throw dimension_mismatch("ensemble_from_stiefel: Stiefel point has r=" + std::to_string(m.r()) +
                             " but rank(sigma)=" + std::to_string(f.rank()));
  }
  return detail::ensemble_from_factor(f, m.matrix());
}

inline double average_output_entropy(const QuantumChannel& ch, const Ensemble& ens) {
  if (ens.dim() != ch.dim_in()) {
    throw dimension_mismatch("average_output_entropy: ensemble dimension " + std::to_string(ens.dim()) +
                             " != channel input " + std::to_string(ch.dim_in()));
  }
  double s = 0.0;
  for (std::size_t j = 0; j < ens.size(); ++j) s += ens.weights[j] * von_neumann_entropy(ch.apply(ens.states[j]));
  return s;
}

// ---------------------------------------------------------------------------
// Optimizer configuration and results

struct OptimizerConfig {
  std::optional<int> k;  // ensemble size; nullopt = rank^2
  int restarts = 32;
  int max_iters = 500;  // sweeps per restart
  double obj_tol = 1e-9;
  std::uint64_t seed = 0;
  int threads = 1;
};

inline void validate(const OptimizerConfig& cfg) {
  if (cfg.restarts < 1) throw invalid_input("OptimizerConfig: restarts must be >= 1");
  if (cfg.max_iters < 1) throw invalid_input("OptimizerConfig: maxIters must be >= 1");
  if (!(cfg.obj_tol > 0.0)) throw invalid_input("OptimizerConfig: objTol must be > 0");
  if (cfg.k && *cfg.k < 1) throw invalid_input("OptimizerConfig: k must be >= 1");
  if (cfg.threads < 1) throw invalid_input("OptimizerConfig: threads must be >= 1");
}

struct HhatEstimate {
  double value = 0.0;
  Ensemble best_ensemble;
  std::vector<double> restart_values;  // best value reached by each restart
  int iterations = 0;                  // sweeps summed over restarts
  double singleton_value = 0.0;        // S(Phi(sigma))
};

/// Called after every sweep with (restart index, current Stiefel coordinates).
using SweepObserver = std::function<void(int, const ComplexMatrix&)>;

namespace detail {

/// Evaluates pi * S(Phi(psi psi^dagger / pi)) for unnormalized psi through the
/// Kraus images A = [K_1 psi, ..., K_n psi]: the output is A A^dagger, whose
/// nonzero spectrum equals that of A^dagger A.
class OutputEntropyKernel {
 public:
  explicit OutputEntropyKernel(const QuantumChannel& ch) {
    const QuantumChannel reduced =
        ch.kraus().size() > static_cast<std::size_t>(ch.dim_in() * ch.dim_out()) ? minimal_kraus(ch) : ch;
    dim_in_ = reduced.dim_in();
    dim_out_ = reduced.dim_out();
    n_ = static_cast<int>(reduced.kraus().size());
    stacked_.resize(static_cast<Eigen::Index>(n_) * dim_out_, dim_in_);
    for (int i = 0; i < n_; ++i) stacked_.middleRows(static_cast<Eigen::Index>(i) * dim_out_, dim_out_) = reduced.kraus()[i];
  }

  int dim_in() const { return dim_in_; }

  /// Column i of the result is K_i psi.
  ComplexMatrix images(const ComplexVector& psi) const {
    const ComplexVector flat = stacked_ * psi;
    return Eigen::Map<const ComplexMatrix>(flat.data(), dim_out_, n_);
  }

  /// Unnormalized member cost in bits: -sum mu log mu + pi log pi, where mu
  /// is the spectrum of A A^dagger and pi = |A|_F^2.
  double cost(const ComplexMatrix& a) const {
    const double weight = a.squaredNorm();
    if (weight <= 0.0 || n_ == 1) return 0.0;
    double s = weight * std::log(weight);
    if (a.cols() <= a.rows()) {
      s -= gram_xlogx(a, true);
    } else {
      s -= gram_xlogx(a, false);
    }
    return std::max(0.0, s / std::numbers::ln2);
  }

  double cost(const ComplexVector& psi) const { return cost(images(psi)); }

 private:
  static double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

  template <int N>
  static double fixed_xlogx(const ComplexMatrix& a, bool inner) {
    using Mat = Eigen::Matrix<complex, N, N>;
    Mat g;
    if (inner) {
      g.noalias() = a.adjoint() * a;
    } else {
      g.noalias() = a * a.adjoint();
    }
    if constexpr (N == 2) {
      const double x = g(0, 0).real();
      const double y = g(1, 1).real();
      const double half_tr = 0.5 * (x + y);
      const double disc = std::sqrt(0.25 * (x - y) * (x - y) + std::norm(g(0, 1)));
      return xlogx(half_tr + disc) + xlogx(half_tr - disc);
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> solver(g, Eigen::EigenvaluesOnly);
      double s = 0.0;
      for (int i = 0; i < N; ++i) s += xlogx(solver.eigenvalues()(i));
      return s;
    }
  }

  /// sum x log x over the spectrum of A^dagger A (inner) or A A^dagger.
  static double gram_xlogx(const ComplexMatrix& a, bool inner) {
    const Eigen::Index n = inner ? a.cols() : a.rows();
    switch (n) {
      case 1: return xlogx(a.squaredNorm());
      case 2: return fixed_xlogx<2>(a, inner);
      case 3: return fixed_xlogx<3>(a, inner);
      case 4: return fixed_xlogx<4>(a, inner);
      case 6: return fixed_xlogx<6>(a, inner);
      default: {
        const ComplexMatrix g = inner ? ComplexMatrix(a.adjoint() * a) : ComplexMatrix(a * a.adjoint());
        const RealVector ev = hermitian_eigenvalues_unchecked(g);
        double s = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) s += xlogx(ev(i));
        return s;
      }
    }
  }

  int dim_in_ = 0;
  int dim_out_ = 0;
  int n_ = 0;
  ComplexMatrix stacked_;
};

struct RotationChoice {
  double theta = 0.0;
  double phi = 0.0;
  double value = 0.0;
};

/// Golden-section minimization of a 1D function on [lo, hi].
template <class F>
std::pair<double, double> golden_section(F&& f, double lo, double hi, double x_tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > x_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

/// Picks the Givens rotation G(theta, phi) = [[c, -e^{-i phi} s], [e^{i phi} s, c]]
/// minimizing pair_cost(theta, phi).
///
/// Wide mode scans a coarse (theta, phi) grid and refines the best cell by
/// golden-section search in the angle, then in the phase. Local mode takes the
/// phase of steepest descent from a central-difference gradient at the
/// identity, skips the pair when that slope is below `slope_floor`, and then
/// refines angle and phase by golden-section search.
template <class F>
RotationChoice choose_rotation(F&& pair_cost, double baseline, bool wide, double slope_floor) {
  constexpr double pi = std::numbers::pi;
  RotationChoice best{0.0, 0.0, baseline};
  double theta_lo = -pi / 16, theta_hi = pi / 16;
  double phi_half = pi / 8;
  if (wide) {
    for (int pk = 0; pk < 4; ++pk) {
      const double phi = pk * pi / 4;
      for (int tk = -3; tk <= 4; ++tk) {
        if (tk == 0) continue;
        const double theta = tk * pi / 8;
        const double v = pair_cost(theta, phi);
        if (v < best.value) best = {theta, phi, v};
      }
    }
    theta_lo = best.theta - pi / 8;
    theta_hi = best.theta + pi / 8;
    phi_half = pi / 4;
  } else {
    // d/dtheta at theta = 0 is a cos(phi) + b sin(phi).
    constexpr double h = 1e-5;
    const double a = (pair_cost(h, 0.0) - pair_cost(-h, 0.0)) / (2 * h);
    const double b = (pair_cost(h, pi / 2) - pair_cost(-h, pi / 2)) / (2 * h);
    const double slope = std::hypot(a, b);
    if (!(slope > slope_floor)) return best;
    // Moving to positive theta at phase phi descends fastest.
    best.phi = std::atan2(-b, -a);
    theta_lo = -pi / 64;
    theta_hi = pi / 8;
  }
  {
    const double phi = best.phi;
    auto [t, v] = golden_section([&](double t) { return pair_cost(t, phi); }, theta_lo, theta_hi, 1e-5);
    if (v < best.value) best = {t, phi, v};
  }
  if (best.theta != 0.0) {
    const double theta = best.theta;
    auto [ph, v] = golden_section([&](double ph) { return pair_cost(theta, ph); }, best.phi - phi_half,
                                  best.phi + phi_half, 1e-5);
    if (v < best.value) best = {theta, ph, v};
  }
  return best;
}

/// Slope below which a pair is left alone in local sweeps.
inline double slope_floor_for(double obj_tol) { return 1e-2 * std::sqrt(obj_tol); }

struct RestartResult {
  double value = std::numeric_limits<double>::infinity();
  ComplexMatrix stiefel;
  int sweeps = 0;
};

/// One restart of the Stiefel sweep optimizer.
inline RestartResult run_roof_restart(const OutputEntropyKernel& kernel, const SpectralFactor& f,
                                      ComplexMatrix m, const OptimizerConfig& cfg, int restart_index,
                                      const SweepObserver& observer) {
  const int k = static_cast<int>(m.rows());
  std::vector<ComplexVector> psi(static_cast<std::size_t>(k));
  std::vector<ComplexMatrix> img(static_cast<std::size_t>(k));
  std::vector<double> cost(static_cast<std::size_t>(k));
  auto refresh = [&] {
    for (int j = 0; j < k; ++j) {
      psi[j] = f.factor * m.row(j).transpose();
      img[j] = kernel.images(psi[j]);
      cost[j] = kernel.cost(img[j]);
    }
  };
  auto total = [&] {
    double s = 0.0;
    for (double c : cost) s += c;
    return s;
  };

  refresh();
  double current = total();
  ComplexMatrix buf_a = img[0];
  ComplexMatrix buf_b = img[0];
  RestartResult out;
  int sweep = 0;
  while (sweep < cfg.max_iters) {
    const double before = current;
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        const ComplexMatrix& ia = img[a];
        const ComplexMatrix& ib = img[b];
        auto pair_cost = [&](double theta, double phi) {
          const double c = std::cos(theta), s = std::sin(theta);
          const complex e(std::cos(phi), std::sin(phi));
          buf_a.noalias() = c * ia - std::conj(e) * s * ib;
          buf_b.noalias() = e * s * ia + c * ib;
          return kernel.cost(buf_a) + kernel.cost(buf_b);
        };
        const double baseline = cost[a] + cost[b];
        const RotationChoice rot = choose_rotation(pair_cost, baseline, sweep < 2, slope_floor_for(cfg.obj_tol));
        if (rot.value < baseline - 1e-15) {
          const double c = std::cos(rot.theta), s = std::sin(rot.theta);
          const complex e(std::cos(rot.phi), std::sin(rot.phi));
          const Eigen::RowVectorXcd ra = m.row(a), rb = m.row(b);
          m.row(a) = c * ra - std::conj(e) * s * rb;
          m.row(b) = e * s * ra + c * rb;
          const ComplexMatrix na = c * ia - std::conj(e) * s * ib;
          const ComplexMatrix nb = e * s * ia + c * ib;
          img[a] = na;
          img[b] = nb;
          cost[a] = kernel.cost(img[a]);
          cost[b] = kernel.cost(img[b]);
        }
      }
    }
    ++sweep;
    // Re-derive images from the coordinates so rounding cannot accumulate.
    refresh();
    current = total();
    if (observer) observer(restart_index, m);
    if (before - current < cfg.obj_tol) break;
  }
  out.value = current;
  out.stiefel = std::move(m);
  out.sweeps = sweep;
  return out;
}

}  // namespace detail

/// Multi-start estimate of the output-entropy roof of `ch` at `sigma`.
/// Restart 0 starts from the eigenbasis ensemble, restart i >= 1 from a
/// Haar-random isometry drawn from substream (seed, i). The singleton
/// ensemble {1, sigma} is always a candidate.
inline HhatEstimate estimate_h_hat(const QuantumChannel& ch, const DensityMatrix& sigma,
                                   const OptimizerConfig& cfg, const SweepObserver& observer = {}) {
  validate(cfg);
  if (sigma.dim() != ch.dim_in()) {
    throw dimension_mismatch("estimate_h_hat: state dimension " + std::to_string(sigma.dim()) +
                             " != channel input " + std::to_string(ch.dim_in()));
  }
  HhatEstimate est;
  est.singleton_value = von_neumann_entropy(ch.apply(sigma));
  const SpectralFactor f = spectral_factor(sigma);
  const int r = f.rank();
  const int k = cfg.k.value_or(r * r);
  if (k < r) {
    throw invalid_input("estimate_h_hat: k=" + std::to_string(k) + " is below rank(sigma)=" + std::to_string(r));
  }

  const detail::OutputEntropyKernel kernel(ch);
  std::vector<detail::RestartResult> results(static_cast<std::size_t>(cfg.restarts));
  detail::parallel_for(cfg.restarts, cfg.threads, [&](int i) {
    ComplexMatrix start;
    if (i == 0) {
      start = StiefelPoint::identity(k, r).matrix();
    } else {
      RandomStream stream = RandomStream::substream(cfg.seed, static_cast<std::uint64_t>(i));
      start = StiefelPoint::random(k, r, stream).matrix();
    }
    results[static_cast<std::size_t>(i)] = detail::run_roof_restart(kernel, f, std::move(start), cfg, i, observer);
  });

  int best = -1;
  double best_value = est.singleton_value;
  for (int i = 0; i < cfg.restarts; ++i) {
    const auto& res = results[static_cast<std::size_t>(i)];
    est.restart_values.push_back(res.value);
    est.iterations += res.sweeps;
    if (res.value < best_value) {
      best_value = res.value;
      best = i;
    }
  }
  if (best < 0) {
    est.best_ensemble = Ensemble{{1.0}, {sigma}};
    est.value = est.singleton_value;
  } else {
    est.best_ensemble = detail::ensemble_from_factor(f, results[static_cast<std::size_t>(best)].stiefel);
    est.value = average_output_entropy(ch, est.best_ensemble);
    if (est.singleton_value < est.value) {
      est.best_ensemble = Ensemble{{1.0}, {sigma}};
      est.value = est.singleton_value;
    }
  }
  return est;
}

struct ChiEstimate {
  double value = 0.0;
  ComplexVector minimizer;
  std::vector<double> restart_values;
};

/// Multi-start minimization of S(Phi(|psi><psi|)) over unit vectors, using
/// Givens rotations on coordinate pairs of psi.
inline ChiEstimate minimize_output_entropy(const QuantumChannel& ch, const OptimizerConfig& cfg) {
  validate(cfg);
  const detail::OutputEntropyKernel kernel(ch);
  const int d = ch.dim_in();
  struct Run {
    double value;
    ComplexVector psi;
  };
  std::vector<Run> runs(static_cast<std::size_t>(cfg.restarts));
  detail::parallel_for(cfg.restarts, cfg.threads, [&](int i) {
    RandomStream stream = RandomStream::substream(cfg.seed, static_cast<std::uint64_t>(i));
    ComplexVector psi = random_unit_vector(d, stream);
    double current = kernel.cost(psi);
    for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
      const double before = current;
      for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
          auto rotated = [&](double theta, double phi) {
            const double c = std::cos(theta), s = std::sin(theta);
            const complex e(std::cos(phi), std::sin(phi));
            ComplexVector out = psi;
            out(a) = c * psi(a) - std::conj(e) * s * psi(b);
            out(b) = e * s * psi(a) + c * psi(b);
            return out;
          };
          auto f = [&](double theta, double phi) { return kernel.cost(rotated(theta, phi)); };
          const auto rot = detail::choose_rotation(f, current, sweep < 2, detail::slope_floor_for(cfg.obj_tol));
          if (rot.value < current - 1e-15) {
            psi = rotated(rot.theta, rot.phi);
            psi.normalize();
            current = kernel.cost(psi);
          }
        }
      }
      if (before - current < cfg.obj_tol) break;
    }
    runs[static_cast<std::size_t>(i)] = {current, psi};
  });
  ChiEstimate out;
  out.value = std::numeric_limits<double>::infinity();
  for (const auto& run : runs) {
    out.restart_values.push_back(run.value);
    if (run.value < out.value) {
      out.value = run.value;
      out.minimizer = run.psi;
    }
  }
  return out;
}

inline double estimate_chi(const QuantumChannel& ch, const OptimizerConfig& cfg) {
  return minimize_output_entropy(ch, cfg).value;
}

}  // namespace superadd
