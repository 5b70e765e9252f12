#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "charsum/gf.hpp"

namespace charsum::chars {

/// Exact value of a character: either zero (the chi(0) = 0 convention) or the
/// root of unity zeta_L^e with 0 <= e < L.
class CharValue {
 public:
  static CharValue zero() { return CharValue{}; }
  static CharValue root(std::int64_t e, std::uint64_t L);
  static CharValue one() { return root(0, 1); }

  bool is_zero() const noexcept { return zero_; }
  std::uint64_t exponent() const noexcept { return e_; }
  std::uint64_t modulus() const noexcept { return L_; }

  /// The same value written over zeta_L for a multiple L of modulus().
  CharValue promoted(std::uint64_t L) const;
  /// Products of roots of different orders live over the lcm of the orders.
  CharValue operator*(const CharValue& other) const;
  CharValue conj() const;

  std::complex<double> to_complex() const;

  /// Value equality: zeta_4^2 == zeta_2^1.
  bool operator==(const CharValue& other) const;

 private:
  CharValue() = default;
  bool zero_ = true;
  std::uint64_t e_ = 0;
  std::uint64_t L_ = 1;
};

/// Multiplicative character chi_j: gen^a -> zeta_{q-1}^(j a), chi_j(0) = 0.
/// Holds a non-owning pointer; the field must outlive the character.
class MulCharacter {
 public:
  MulCharacter(const gf::FieldTable& field, std::int64_t j);

  const gf::FieldTable& field() const noexcept { return *field_; }
  std::uint32_t index() const noexcept { return j_; }
  bool is_trivial() const noexcept { return j_ == 0; }
  /// Only meaningful for odd q.
  bool is_quadratic() const noexcept;

  CharValue operator()(gf::Element x) const;
  /// Exponent of chi(x) over zeta_{q-1}; x must be nonzero.
  std::uint32_t exponent_at(gf::Element x) const;

  MulCharacter operator*(const MulCharacter& other) const;
  MulCharacter conj() const;
  std::uint32_t order() const;
  CharValue at_minus_one() const;

  bool operator==(const MulCharacter& other) const noexcept {
    return field_ == other.field_ && j_ == other.j_;
  }

 private:
  const gf::FieldTable* field_;
  std::uint32_t j_;
};

/// psi_a(x) = zeta_p^Tr(a x). a = 1 is the canonical character.
class AddCharacter {
 public:
  static AddCharacter canonical(const gf::FieldTable& field) { return AddCharacter(field, 1); }
  /// Throws std::invalid_argument for a = 0 (the trivial character).
  AddCharacter(const gf::FieldTable& field, gf::Element twist);

  const gf::FieldTable& field() const noexcept { return *field_; }
  gf::Element twist() const noexcept { return a_; }
  bool is_canonical() const noexcept { return a_ == 1; }

  CharValue operator()(gf::Element x) const;
  /// Exponent of psi(x) over zeta_p.
  std::uint32_t exponent_at(gf::Element x) const;

 private:
  const gf::FieldTable* field_;
  gf::Element a_;
};

std::vector<MulCharacter> enumerate_characters(const gf::FieldTable& field, bool nontrivial_only);

/// Index of the quadratic character, (q-1)/2; q must be odd.
std::uint32_t quadratic_index(const gf::FieldTable& field);

/// Table of zeta_N^k, k in [0, N), each entry correctly rounded.
class RootTable {
 public:
  explicit RootTable(std::uint64_t N);
  std::uint64_t size() const noexcept { return roots_.size(); }
  const std::complex<double>& operator[](std::uint64_t k) const { return roots_[k]; }

 private:
  std::vector<std::complex<double>> roots_;
};

/// Process-wide cache of root tables; entries are never evicted, so the
/// returned reference stays valid. Thread-safe.
const RootTable& cached_roots(std::uint64_t N);

/// zeta_N^k in double precision with argument reduction done in integers.
std::complex<double> unit_root(std::uint64_t k, std::uint64_t N);

}  // namespace charsum::chars
