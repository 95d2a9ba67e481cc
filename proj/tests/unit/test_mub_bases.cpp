#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "superadd/mub_bases.hpp"

using namespace superadd;

namespace {

complex phase(double turns) { return std::polar(1.0, 2.0 * std::numbers::pi * turns); }

}  // namespace

TEST_CASE("is_prime", "[mub]") {
  for (int p : {2, 3, 5, 7, 11, 13, 97}) REQUIRE(is_prime(p));
  for (int n : {-3, 0, 1, 4, 6, 9, 15, 25, 91}) REQUIRE_FALSE(is_prime(n));
}

TEST_CASE("fourier_basis", "[mub]") {
  const Basis f = fourier_basis(2);
  const double h = 1.0 / std::sqrt(2.0);
  REQUIRE(std::abs(f.vector(0)(0) - h) < 1e-15);
  REQUIRE(std::abs(f.vector(0)(1) - h) < 1e-15);
  REQUIRE(std::abs(f.vector(1)(1) + h) < 1e-15);
  for (int d : {2, 3, 5, 7}) {
    const Basis e = fourier_basis(d);
    REQUIRE(unitarity_defect(e.vectors()) <= 1e-12);
    REQUIRE(unbiasedness_defect(e, computational_basis(d)) <= 1e-12);
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (int j = 0; j < d; ++j) sum += e.projector(j);
    REQUIRE(max_abs_diff(sum, ComplexMatrix::Identity(d, d)) <= 1e-12);
  }
}

TEST_CASE("Weyl shifts move the Fourier basis cyclically", "[mub][property]") {
  for (int d : {2, 3, 5, 7})
    for (int n = 0; n < d; ++n) REQUIRE(shift_defect(d, n) <= 1e-12);
  REQUIRE_THROWS_AS(shift_defect(3, 3), invalid_input);
}

TEST_CASE("mub_family", "[mub]") {
  SECTION("explicit vector at d=3, s=1") {
    const MubFamily fam = mub_family(3);
    REQUIRE(fam.bases.size() == 3);
    const ComplexVector v = fam.bases[1].vector(0);
    for (int k = 0; k < 3; ++k) REQUIRE(std::abs(v(k) - phase(k * k / 3.0) / std::sqrt(3.0)) <= 1e-14);
  }
  SECTION("basis s=0 is the Fourier basis") {
    for (int d : {3, 5, 7}) REQUIRE(max_abs_diff(mub_family(d).bases[0].vectors(), fourier_basis(d).vectors()) <= 1e-14);
  }
  SECTION("qubit family is the X and Y eigenbases") {
    const MubFamily fam = mub_family(2);
    REQUIRE(fam.bases.size() == 2);
    ComplexMatrix x(2, 2), y(2, 2);
    x << 0, 1, 1, 0;
    y << 0, complex(0, -1), complex(0, 1), 0;
    for (int j = 0; j < 2; ++j) {
      const double sign = j == 0 ? 1.0 : -1.0;
      REQUIRE(max_abs_diff(x * fam.bases[0].vector(j), sign * fam.bases[0].vector(j)) <= 1e-14);
      REQUIRE(max_abs_diff(y * fam.bases[1].vector(j), sign * fam.bases[1].vector(j)) <= 1e-14);
    }
  }
  SECTION("mutual unbiasedness") {
    for (int d : {2, 3, 5, 7, 11, 13}) {
      const MubFamily fam = mub_family(d);
      REQUIRE(fam.d == d);
      REQUIRE(family_unbiasedness_defect(fam) <= 1e-12);
      for (const Basis& b : fam.bases) REQUIRE(unitarity_defect(b.vectors()) <= 1e-12);
    }
  }
  SECTION("composite dimensions are rejected") {
    for (int d : {1, 4, 6, 9}) REQUIRE_THROWS_AS(mub_family(d), prime_dimension_required);
    try {
      mub_family(4);
    } catch (const prime_dimension_required& e) {
      REQUIRE(std::string(e.what()).find("prime dimension required") != std::string::npos);
    }
  }
}

TEST_CASE("Basis validation", "[mub]") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = 0.1;
  REQUIRE_THROWS_AS(Basis(m), invalid_input);
  REQUIRE_THROWS_AS(unbiasedness_defect(fourier_basis(2), fourier_basis(3)), dimension_mismatch);
}
