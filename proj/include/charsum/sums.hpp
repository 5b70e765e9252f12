#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "charsum/characters.hpp"
#include "charsum/gf.hpp"

namespace charsum::sums {

struct WitnessResidue {
  std::uint64_t ell = 0;
  std::uint64_t residue = 0;
  bool operator==(const WitnessResidue&) const = default;
};

/// A complex value with an absolute error bound on its distance from the
/// exact algebraic number it approximates.
struct SumValue {
  double re = 0.0;
  double im = 0.0;
  double err = 0.0;
  std::vector<WitnessResidue> witness;

  static SumValue exact(double re, double im = 0.0) { return SumValue{re, im, 0.0, {}}; }
  static SumValue from(std::complex<double> z, double err) { return SumValue{z.real(), z.imag(), err, {}}; }

  std::complex<double> value() const { return {re, im}; }
  double abs() const { return std::abs(value()); }
};

SumValue operator+(const SumValue& a, const SumValue& b);
SumValue operator-(const SumValue& a, const SumValue& b);
SumValue operator*(const SumValue& a, const SumValue& b);
SumValue operator*(double s, const SumValue& a);
SumValue conj(const SumValue& a);
/// An exact root-of-unity factor.
SumValue operator*(const chars::CharValue& c, const SumValue& a);

/// |a - b| of the numeric values.
double abs_diff(const SumValue& a, const SumValue& b);

/// Sums of signed products zeta_{q-1}^a * zeta_p^b. Counts are kept as an
/// exact integer histogram when it fits, so numeric conversion happens once
/// per distinct root; otherwise terms are accumulated with compensated
/// summation. Summation order is the order of add() calls.
class CyclotomicAccumulator {
 public:
  CyclotomicAccumulator(std::uint64_t mul_order, std::uint64_t add_order);

  void add(std::uint64_t mul_exp, std::uint64_t add_exp, int sign = 1);
  void add_mul(std::uint64_t mul_exp, int sign = 1) { add(mul_exp, 0, sign); }
  std::uint64_t terms() const noexcept { return terms_; }
  SumValue result() const;

 private:
  std::uint64_t mul_order_;
  std::uint64_t add_order_;
  std::uint64_t terms_ = 0;
  std::vector<std::int64_t> counts_;
  double re_ = 0.0, im_ = 0.0, re_c_ = 0.0, im_c_ = 0.0;
  const chars::RootTable* mul_roots_;
  const chars::RootTable* add_roots_;
};

/// A tuple of multiplicative characters over one field.
class CharTuple {
 public:
  CharTuple() = default;
  CharTuple(std::vector<chars::MulCharacter> chars);
  CharTuple(std::initializer_list<chars::MulCharacter> chars)
      : CharTuple(std::vector<chars::MulCharacter>(chars)) {}

  std::size_t size() const noexcept { return chars_.size(); }
  bool empty() const noexcept { return chars_.empty(); }
  const chars::MulCharacter& operator[](std::size_t i) const { return chars_[i]; }
  auto begin() const { return chars_.begin(); }
  auto end() const { return chars_.end(); }

 private:
  std::vector<chars::MulCharacter> chars_;
};

/// True iff no entry of a equals an entry of b.
bool disjoint(const CharTuple& a, const CharTuple& b);

SumValue gauss_sum(const chars::MulCharacter& chi, const chars::AddCharacter& psi);

/// All q-1 Gauss sums tau(chi_j) against the canonical additive character.
/// Built once per field and shared read-only.
class GaussTable {
 public:
  explicit GaussTable(const gf::FieldTable& field);

  const gf::FieldTable& field() const noexcept { return *field_; }
  const SumValue& operator[](std::uint32_t j) const { return taus_[j]; }
  const SumValue& at(const chars::MulCharacter& chi) const;

 private:
  const gf::FieldTable* field_;
  std::vector<SumValue> taus_;
};

SumValue jacobi_sum(const chars::MulCharacter& chi1, const chars::MulCharacter& chi2);

/// q^-1 tau(chi1) tau(chi2) conj(tau(chi1 chi2)). Throws for the both-trivial
/// pair, where J(1, 1) = q - 2 is not given by this expression.
SumValue jacobi_via_gauss(const chars::MulCharacter& chi1, const chars::MulCharacter& chi2,
                          const chars::AddCharacter& psi);

/// Hypergeometric sum by direct enumeration of the locus N(x) = t N(y), with
/// the last coordinate solved from the constraint. Cost (q-1)^(m+n-1).
SumValue hyper_naive(gf::Element t, const CharTuple& chis, const CharTuple& etas);

/// Hypergeometric sum through the character-group expansion of the norm
/// constraint:
///   (-1)^(m+n-1) / (q^((m+n-1)/2) (q-1)) * sum_rho conj(rho(t))
///       * prod_i tau(chi_i rho) * prod_j conj(tau(eta_j rho)).
/// O(q (m+n)) per call given the table.
SumValue hyper_mellin(const GaussTable& table, gf::Element t, const CharTuple& chis,
                      const CharTuple& etas);

/// hyper_mellin at every t at once, indexed by element code; entry 0 is
/// unused. O(q^2) given the table.
std::vector<SumValue> hyper_mellin_profile(const GaussTable& table, const CharTuple& chis,
                                           const CharTuple& etas);

enum class GForm { product, fraction, ci };

/// The double sum over u, v in k of chi(u(v+1) / (v(u+1))) eta(uv - 1), with
/// every degenerate term vanishing. Accepts trivial characters.
SumValue g_direct(const chars::MulCharacter& chi, const chars::MulCharacter& eta,
                  GForm form = GForm::product);

/// Every J(chi_a, chi_b) by direct summation; O(q^3) to build.
class JacobiTable {
 public:
  explicit JacobiTable(const gf::FieldTable& field);

  const gf::FieldTable& field() const noexcept { return *field_; }
  const SumValue& operator()(std::uint32_t a, std::uint32_t b) const { return js_[a * order_ + b]; }

 private:
  const gf::FieldTable* field_;
  std::uint32_t order_;
  std::vector<SumValue> js_;
};

/// eta(-1)/(q-1) * sum_rho J(rho, eta) J(rho, conj chi) J(rho, chi).
SumValue g_jacobi_triple(const chars::MulCharacter& chi, const chars::MulCharacter& eta);
SumValue g_jacobi_triple(const JacobiTable& table, const chars::MulCharacter& chi,
                         const chars::MulCharacter& eta);

/// eta(-1) tau(eta) tau(conj chi) tau(chi) / (q^3 (q-1))
///   * sum_rho tau(rho)^3 conj(tau(rho eta) tau(rho conj chi) tau(rho chi)).
SumValue g_gauss_form(const GaussTable& table, const chars::MulCharacter& chi,
                      const chars::MulCharacter& eta);

/// printed:   chi(-1) eta(-1) tau(eta) q^(1/2) H(1; (1,1,1), (conj eta, chi, conj chi))
/// corrected: -chi(-1) eta(-1) tau(eta) q^(1/2) H(1; (1,1,1), (eta, conj chi, chi))
///
/// Only the corrected form equals g for every nontrivial pair. Opening the
/// Gauss sums of g_gauss_form produces the lower tuple (eta, conj chi, chi)
/// after H conjugates it, and the (-1)^(m+n-1) = -1 normalisation of H is
/// compensated by the leading sign. The printed form is kept so that scans can
/// report where it fails.
enum class TheoremForm { printed, corrected };
enum class HyperPath { mellin, naive };

CharTuple theorem_upper(const gf::FieldTable& field);
CharTuple theorem_lower(const chars::MulCharacter& chi, const chars::MulCharacter& eta,
                        TheoremForm form);

SumValue theorem_rhs(const GaussTable& table, const chars::MulCharacter& chi,
                     const chars::MulCharacter& eta, TheoremForm form = TheoremForm::printed,
                     HyperPath path = HyperPath::mellin);

/// sum_alpha rho(alpha + omega) sum_t chi(t) eta(alpha^2 - omega^2 t) conj(eta)(1 - t),
/// alpha, t over GF(q), rho over GF(q^2).
SumValue s_sum(const chars::MulCharacter& chi, const chars::MulCharacter& eta,
               const chars::MulCharacter& rho, const gf::QuadExtension& ext);

}  // namespace charsum::sums
