#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace charsum::gf {

/// Element code: the base-p packing of polynomial coefficients, constant term
/// in the least significant digit.
using Element = std::uint32_t;

inline constexpr std::uint64_t kMaxFieldSize = std::uint64_t{1} << 20;

struct FieldSpec {
  std::uint32_t p = 0;
  std::uint32_t n = 0;
  std::uint32_t q = 0;
  /// Monic modulus over GF(p), constant term first, n+1 entries.
  std::vector<std::uint32_t> modulus;

  bool operator==(const FieldSpec&) const = default;
};

/// Deterministic for all 64-bit inputs.
bool is_prime(std::uint64_t n);

/// Distinct prime divisors in increasing order.
std::vector<std::uint64_t> prime_divisors(std::uint64_t n);

/// Irreducibility over GF(p) for a monic polynomial (constant term first).
/// A polynomial of degree n is irreducible iff it has no factor of degree
/// <= n/2, detected with gcd(f, x^(p^i) - x) for i = 1..n/2.
bool is_irreducible(std::span<const std::uint32_t> monic, std::uint32_t p);

/// Smallest monic irreducible of degree n, comparing coefficient sequences
/// lexicographically from the constant term up.
std::vector<std::uint32_t> smallest_irreducible(std::uint32_t p, std::uint32_t n);

enum class FieldOp { add, mul, neg, inv, pow };

/// Fully tabulated GF(p^n). Immutable after construction.
class FieldTable {
 public:
  /// Throws std::invalid_argument for a non-prime p, n = 0, q above the size
  /// cap, or a supplied modulus that is not monic irreducible of degree n.
  static FieldTable build(std::uint32_t p, std::uint32_t n,
                          std::optional<std::vector<std::uint32_t>> modulus = std::nullopt);

  /// Rebuilds a table from a stored exponential table. log and trace are
  /// recomputed; exp is cross-checked against repeated multiplication by gen.
  static FieldTable from_exp_table(const FieldSpec& spec, Element gen,
                                   std::vector<Element> exp);

  const FieldSpec& spec() const noexcept { return spec_; }
  std::uint32_t p() const noexcept { return spec_.p; }
  std::uint32_t n() const noexcept { return spec_.n; }
  std::uint32_t q() const noexcept { return spec_.q; }
  /// q - 1, the order of the multiplicative group.
  std::uint32_t order() const noexcept { return spec_.q - 1; }
  Element gen() const noexcept { return gen_; }
  bool odd() const noexcept { return spec_.p != 2; }

  Element add(Element a, Element b) const;
  Element sub(Element a, Element b) const;
  Element neg(Element a) const { return neg_[a]; }
  Element plus_one(Element a) const { return plus_one_[a]; }
  Element minus_one() const noexcept { return neg_[1]; }
  Element mul(Element a, Element b) const;
  /// Throws std::domain_error on a = 0.
  Element inv(Element a) const;
  Element div(Element a, Element b) const { return mul(a, inv(b)); }
  /// pow(0, 0) = 1.
  Element pow(Element a, std::uint64_t e) const;

  /// Discrete log against gen(); x must be nonzero.
  std::uint32_t log(Element x) const { return log_[x]; }
  Element exp(std::uint64_t a) const { return exp_[a % order()]; }
  /// Absolute trace to GF(p), as an integer in [0, p).
  std::uint32_t trace(Element x) const { return trace_[x]; }

  std::span<const Element> exp_table() const noexcept { return exp_; }
  std::span<const std::uint32_t> log_table() const noexcept { return log_; }
  std::span<const std::uint32_t> trace_table() const noexcept { return trace_; }

  std::vector<std::uint32_t> digits(Element x) const;
  Element from_digits(std::span<const std::uint32_t> digits) const;

  /// Discrete log as seen by multiplicative characters. Equal to log(x)
  /// unless the table was produced by with_character_log_override.
  std::uint32_t character_log(Element x) const {
    return x == override_element_ ? override_log_ : log_[x];
  }

  /// Copy whose character-side discrete log at x is replaced by new_log.
  /// Field arithmetic is unaffected. Used by mutation tests only.
  FieldTable with_character_log_override(Element x, std::uint32_t new_log) const;

  bool operator==(const FieldTable&) const = default;

 private:
  FieldTable() = default;
  void build_tables();
  void build_derived();
  Element poly_mul(Element a, Element b) const;

  FieldSpec spec_;
  Element gen_ = 0;
  std::vector<Element> exp_;
  std::vector<std::uint32_t> log_;
  std::vector<std::uint32_t> trace_;
  std::vector<Element> neg_;
  std::vector<Element> plus_one_;
  std::vector<std::uint32_t> pow_p_;
  Element override_element_ = ~Element{0};
  std::uint32_t override_log_ = 0;
};

Element field_op(const FieldTable& tbl, FieldOp kind, Element a, std::uint64_t b);

using FieldPtr = std::shared_ptr<const FieldTable>;

inline FieldPtr make_field(std::uint32_t p, std::uint32_t n,
                           std::optional<std::vector<std::uint32_t>> modulus = std::nullopt) {
  return std::make_shared<const FieldTable>(FieldTable::build(p, n, std::move(modulus)));
}

/// GF(q^2) = GF(q)(omega) with omega^2 = delta, delta the smallest non-square
/// of GF(q). "Primitive" is read in the field-extension sense: omega generates
/// the extension, it is not a generator of GF(q^2)^x (which can never square
/// into GF(q) for q > 1).
///
/// The extension is tabulated as GF(p^(2n)) with its own smallest irreducible
/// modulus. embed sends the base generator class x to the smallest root of the
/// base modulus in the extension, and omega is the smallest square root of
/// embed(delta).
struct QuadExtension {
  FieldPtr base;
  FieldPtr ext;
  Element omega = 0;
  Element delta = 0;
  std::vector<Element> embed;

  Element embed_element(Element x) const { return embed[x]; }
};

/// Throws std::invalid_argument for even q.
QuadExtension build_quadratic_extension(FieldPtr base);

/// Versioned JSON dump: header {p, n, modulus, gen} then the exp table.
nlohmann::json dump_json(const FieldTable& tbl);
FieldTable load_json(const nlohmann::json& doc);

}  // namespace charsum::gf
