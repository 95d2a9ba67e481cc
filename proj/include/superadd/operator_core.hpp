#pragma once

// Dense complex operators, density matrices, spectra and entropy.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "superadd/errors.hpp"

namespace superadd {

using complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double kHermitian = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kPositivity = 1e-10;
inline constexpr double kEigInputHermitian = 1e-8;
}  // namespace tol

enum class EntropyUnit { bits, nats };

// ---------------------------------------------------------------------------
// Elementary helpers

inline double max_abs_entry(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw dimension_mismatch("max_abs_diff: shapes differ");
  }
  return max_abs_entry(a - b);
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    }
  }
  return true;
}

inline double hermiticity_defect(const ComplexMatrix& m) {
  return max_abs_entry(m - m.adjoint());
}

inline double unitarity_defect(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return INFINITY;
  return max_abs_entry(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
}

/// Kronecker product, index convention (ia*rb + ib, ja*cb + jb).
inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index ia = 0; ia < a.rows(); ++ia) {
    for (Eigen::Index ja = 0; ja < a.cols(); ++ja) {
      out.block(ia * b.rows(), ja * b.cols(), b.rows(), b.cols()) = a(ia, ja) * b;
    }
  }
  return out;
}

inline ComplexVector tensor(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// ---------------------------------------------------------------------------
// Spectra

struct HermitianSpectrum {
  RealVector eigenvalues;     // ascending
  ComplexMatrix eigenvectors;  // columns match eigenvalues
};

namespace detail {

inline void require_square(const ComplexMatrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw dimension_mismatch(std::string(who) + ": square non-empty matrix required, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

inline void require_near_hermitian(const ComplexMatrix& m, const char* who) {
  require_square(m, who);
  if (hermiticity_defect(m) > tol::kEigInputHermitian) {
    throw invalid_input(std::string(who) + ": matrix is not Hermitian within 1e-8");
  }
}

}  // namespace detail

/// Full eigendecomposition of a Hermitian matrix. The input is symmetrized as
/// (m + m^dagger)/2 before solving.
inline HermitianSpectrum hermitian_eig(const ComplexMatrix& m) {
  detail::require_near_hermitian(m, "hermitian_eig");
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw invalid_input("hermitian_eig: solver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Eigenvalues only (ascending). No Hermiticity check; caller guarantees it.
inline RealVector hermitian_eigenvalues_unchecked(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

inline double min_hermitian_eigenvalue(const ComplexMatrix& m) {
  detail::require_near_hermitian(m, "min_hermitian_eigenvalue");
  return hermitian_eigenvalues_unchecked(0.5 * (m + m.adjoint()))(0);
}

// ---------------------------------------------------------------------------
// Density matrices

class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity (each within 1e-10).
  explicit DensityMatrix(ComplexMatrix m) {
    detail::require_square(m, "DensityMatrix");
    if (!all_finite(m)) throw not_a_state("DensityMatrix: non-finite entry");
    if (hermiticity_defect(m) > tol::kHermitian) {
      throw not_a_state("DensityMatrix: not Hermitian within 1e-10");
    }
    const complex tr = m.trace();
    if (std::abs(tr.real() - 1.0) > tol::kTrace || std::abs(tr.imag()) > tol::kTrace) {
      throw not_a_state("DensityMatrix: trace " + std::to_string(tr.real()) + " differs from 1");
    }
    mat_ = 0.5 * (m + m.adjoint());
    if (hermitian_eigenvalues_unchecked(mat_)(0) < -tol::kPositivity) {
      throw not_a_state("DensityMatrix: negative eigenvalue below -1e-10");
    }
  }

  /// Projector onto v / |v|.
  static DensityMatrix pure(const ComplexVector& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw invalid_input("DensityMatrix::pure: zero or non-finite vector");
    const ComplexVector u = v / n;
    return DensityMatrix(u * u.adjoint());
  }

  static DensityMatrix maximally_mixed(int d) {
    if (d < 1) throw invalid_input("maximally_mixed: d must be positive");
    return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  }

  int dim() const { return static_cast<int>(mat_.rows()); }
  const ComplexMatrix& matrix() const { return mat_; }
  double purity() const { return (mat_ * mat_).trace().real(); }

 private:
  ComplexMatrix mat_;
};

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(tensor(a.matrix(), b.matrix()));
}

enum class TraceOut { H, K };

/// Partial trace of an operator on H (x) K. `side` names the factor removed.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, int dim_h, int dim_k, TraceOut side) {
  if (dim_h < 1 || dim_k < 1 || m.rows() != dim_h * dim_k || m.cols() != dim_h * dim_k) {
    throw dimension_mismatch("partial_trace: operator is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected " +
                             std::to_string(dim_h * dim_k) + " square");
  }
  if (side == TraceOut::K) {
    ComplexMatrix out = ComplexMatrix::Zero(dim_h, dim_h);
    for (int i = 0; i < dim_h; ++i)
      for (int j = 0; j < dim_h; ++j)
        for (int k = 0; k < dim_k; ++k) out(i, j) += m(i * dim_k + k, j * dim_k + k);
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(dim_k, dim_k);
  for (int h = 0; h < dim_h; ++h) out += m.block(h * dim_k, h * dim_k, dim_k, dim_k);
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, int dim_h, int dim_k, TraceOut side) {
  return DensityMatrix(partial_trace(rho.matrix(), dim_h, dim_k, side));
}

// ---------------------------------------------------------------------------
// Entropy

/// -sum x log x over a spectrum that sums to one (or to any total; no
/// renormalization happens). Entries in [-1e-10, 0) count as zero.
inline double entropy_of_spectrum(std::span<const double> eigenvalues,
                                  EntropyUnit unit = EntropyUnit::bits) {
  double s = 0.0;
  for (double x : eigenvalues) {
    if (x < -tol::kPositivity) {
      throw not_a_state("entropy: eigenvalue " + std::to_string(x) + " below -1e-10");
    }
    if (x > 0.0) s -= x * std::log(x);
  }
  return unit == EntropyUnit::bits ? s / std::log(2.0) : s;
}

inline double von_neumann_entropy(const DensityMatrix& rho, EntropyUnit unit = EntropyUnit::bits) {
  const RealVector ev = hermitian_eigenvalues_unchecked(rho.matrix());
  return entropy_of_spectrum(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())), unit);
}

// ---------------------------------------------------------------------------
// Random states

/// Seeded source of randomness. Substreams are derived from (seed, index) so
/// parallel work items never share an engine.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(make_engine(seed, 0, false)) {}

  static RandomStream substream(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(make_engine(seed, index, true));
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return normal_(engine_); }

  /// Standard complex Gaussian: E|z|^2 = 1.
  complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }

  ComplexMatrix ginibre(int rows, int cols) {
    ComplexMatrix g(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) g(i, j) = complex_normal();
    return g;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  explicit RandomStream(std::mt19937_64 e) : engine_(std::move(e)) {}

  static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index, bool sub) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(sub ? 0x5ad0u : 0x0u)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline ComplexVector random_unit_vector(int d, RandomStream& stream) {
  if (d < 1) throw invalid_input("random_unit_vector: d must be positive");
  ComplexVector v = stream.ginibre(d, 1).col(0);
  return v / v.norm();
}

/// Haar-distributed pure state.
inline DensityMatrix random_pure_state(int d, RandomStream& stream) {
  return DensityMatrix::pure(random_unit_vector(d, stream));
}

/// Induced measure: G G^dagger / Tr(G G^dagger), G a d x rank Ginibre matrix.
inline DensityMatrix random_density(int d, int rank, RandomStream& stream) {
  if (d < 1 || rank < 1 || rank > d) {
    throw invalid_input("random_density: rank " + std::to_string(rank) + " outside [1, " +
                        std::to_string(d) + "]");
  }
  const ComplexMatrix g = stream.ginibre(d, rank);
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(0.5 * (m + m.adjoint()));
}

/// Haar unitary via QR of a Ginibre matrix with the R-diagonal phases removed.
inline ComplexMatrix haar_unitary(int d, RandomStream& stream) {
  const ComplexMatrix g = stream.ginibre(d, d);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    const complex rjj = r(j, j);
    const double a = std::abs(rjj);
    if (a > 0.0) q.col(j) *= rjj / a;
  }
  return q;
}

/// Random Hermitian matrix with Gaussian entries (GUE-like), for tests and probes.
inline ComplexMatrix random_hermitian(int d, RandomStream& stream) {
  const ComplexMatrix g = stream.ginibre(d, d);
  return 0.5 * (g + g.adjoint());
}

}  // namespace superadd
