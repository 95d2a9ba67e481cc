#pragma once

// Fourier basis and a family of d mutually unbiased bases in prime dimension.

#include <cmath>
#include <string>
#include <vector>

#include "superadd/operator_core.hpp"
#include "superadd/weyl_channels.hpp"

namespace superadd {

namespace tol {
inline constexpr double kBasisOrthonormal = 1e-12;
}

/// Orthonormal basis stored column-wise.
class Basis {
 public:
  explicit Basis(ComplexMatrix vectors) : vectors_(std::move(vectors)) {
    detail::require_square(vectors_, "Basis");
    if (unitarity_defect(vectors_) > tol::kBasisOrthonormal) {
      throw invalid_input("Basis: columns are not orthonormal within 1e-12");
    }
  }

  int dim() const { return static_cast<int>(vectors_.rows()); }
  const ComplexMatrix& vectors() const { return vectors_; }
  ComplexVector vector(int j) const { return vectors_.col(j); }
  ComplexMatrix projector(int j) const { return vectors_.col(j) * vectors_.col(j).adjoint(); }

 private:
  ComplexMatrix vectors_;
};

inline bool is_prime(int n) {
  if (n < 2) return false;
  for (int f = 2; f * f <= n; ++f)
    if (n % f == 0) return false;
  return true;
}

inline Basis computational_basis(int d) {
  if (d < 1) throw invalid_input("computational_basis: d must be positive");
  return Basis(ComplexMatrix::Identity(d, d));
}

/// Column j: d^{-1/2} (w^{jk})_k.
inline Basis fourier_basis(int d) {
  if (d < 2) throw invalid_input("fourier_basis: d must be at least 2");
  ComplexMatrix v(d, d);
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k)
    for (int j = 0; j < d; ++j) v(k, j) = norm * root_of_unity(d, static_cast<long long>(j) * k);
  return Basis(std::move(v));
}

struct MubFamily {
  int d = 0;
  std::vector<Basis> bases;  // s = 0..d-1
  Basis computational = Basis(ComplexMatrix::Identity(1, 1));
};

/// max_{j,k} | |<b1_j|b2_k>| - 1/sqrt(d) |.
inline double unbiasedness_defect(const Basis& b1, const Basis& b2) {
  if (b1.dim() != b2.dim()) throw dimension_mismatch("unbiasedness_defect: bases have different dimensions");
  const double target = 1.0 / std::sqrt(static_cast<double>(b1.dim()));
  const ComplexMatrix overlaps = b1.vectors().adjoint() * b2.vectors();
  return (overlaps.cwiseAbs().array() - target).abs().maxCoeff();
}

/// Odd prime d: basis s has column j = d^{-1/2} (w^{s k^2 + j k})_k.
/// d = 2: eigenbases of Pauli X and Pauli Y.
inline MubFamily mub_family(int d) {
  if (!is_prime(d)) throw prime_dimension_required(d);
  MubFamily fam;
  fam.d = d;
  fam.computational = computational_basis(d);
  if (d == 2) {
    const double h = M_SQRT1_2;
    ComplexMatrix x(2, 2), y(2, 2);
    x << h, h, h, -h;
    y << h, h, complex(0, h), complex(0, -h);
    fam.bases.emplace_back(std::move(x));
    fam.bases.emplace_back(std::move(y));
    return fam;
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (int s = 0; s < d; ++s) {
    ComplexMatrix v(d, d);
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j)
        v(k, j) = norm * root_of_unity(d, static_cast<long long>(s) * k * k + static_cast<long long>(j) * k);
    fam.bases.emplace_back(std::move(v));
  }
  return fam;
}

/// Largest unbiasedness defect over all family pairs and each family member
/// against the computational basis.
inline double family_unbiasedness_defect(const MubFamily& fam) {
  double worst = 0.0;
  for (std::size_t s = 0; s < fam.bases.size(); ++s) {
    worst = std::max(worst, unbiasedness_defect(fam.bases[s], fam.computational));
    for (std::size_t t = s + 1; t < fam.bases.size(); ++t)
      worst = std::max(worst, unbiasedness_defect(fam.bases[s], fam.bases[t]));
  }
  return worst;
}

/// max_j max-entry | W_{0,n} |e_j><e_j| W_{0,n}^* - |e_{j+n}><e_{j+n}| | over the Fourier basis.
inline double shift_defect(int d, int n) {
  if (n < 0 || n >= d) throw invalid_input("shift_defect: n outside [0, d-1]");
  const Basis e = fourier_basis(d);
  const ComplexMatrix w = weyl_operator(d, 0, n);
  double worst = 0.0;
  for (int j = 0; j < d; ++j) {
    const ComplexMatrix moved = w * e.projector(j) * w.adjoint();
    worst = std::max(worst, max_abs_diff(moved, e.projector((j + n) % d)));
  }
  return worst;
}

}  // namespace superadd
