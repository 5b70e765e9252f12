#include "charsum/characters.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace charsum::chars {

namespace {

std::uint64_t reduce(std::int64_t e, std::uint64_t L) {
  const auto m = static_cast<std::int64_t>(L);
  const std::int64_t r = e % m;
  return static_cast<std::uint64_t>(r < 0 ? r + m : r);
}

}  // namespace

std::complex<double> unit_root(std::uint64_t k, std::uint64_t N) {
  k %= N;
  if (k == 0) return {1.0, 0.0};
  if (2 * k == N) return {-1.0, 0.0};
  if (4 * k == N) return {0.0, 1.0};
  if (4 * k == 3 * N) return {0.0, -1.0};
  const long double angle = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k) /
                            static_cast<long double>(N);
  return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

RootTable::RootTable(std::uint64_t N) : roots_(N) {
  if (N == 0) throw std::invalid_argument("root table order must be positive");
  for (std::uint64_t k = 0; k < N; ++k) roots_[k] = unit_root(k, N);
}

const RootTable& cached_roots(std::uint64_t N) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::unique_ptr<RootTable>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[N];
  if (!slot) slot = std::make_unique<RootTable>(N);
  return *slot;
}

CharValue CharValue::root(std::int64_t e, std::uint64_t L) {
  if (L == 0) throw std::invalid_argument("root-of-unity modulus must be positive");
  CharValue v;
  v.zero_ = false;
  v.L_ = L;
  v.e_ = reduce(e, L);
  return v;
}

CharValue CharValue::promoted(std::uint64_t L) const {
  if (zero_) return *this;
  if (L % L_ != 0) throw std::invalid_argument("target modulus is not a multiple");
  CharValue v = *this;
  v.e_ = e_ * (L / L_);
  v.L_ = L;
  return v;
}

CharValue CharValue::operator*(const CharValue& other) const {
  if (zero_ || other.zero_) return zero();
  const std::uint64_t L = std::lcm(L_, other.L_);
  const CharValue a = promoted(L), b = other.promoted(L);
  return root(static_cast<std::int64_t>((a.e_ + b.e_) % L), L);
}

CharValue CharValue::conj() const {
  if (zero_) return *this;
  return root(-static_cast<std::int64_t>(e_), L_);
}

std::complex<double> CharValue::to_complex() const {
  if (zero_) return {0.0, 0.0};
  return unit_root(e_, L_);
}

bool CharValue::operator==(const CharValue& other) const {
  if (zero_ || other.zero_) return zero_ == other.zero_;
  const std::uint64_t L = std::lcm(L_, other.L_);
  return promoted(L).e_ == other.promoted(L).e_;
}

MulCharacter::MulCharacter(const gf::FieldTable& field, std::int64_t j)
    : field_(&field), j_(static_cast<std::uint32_t>(reduce(j, field.order()))) {}

bool MulCharacter::is_quadratic() const noexcept {
  return field_->odd() && 2 * static_cast<std::uint64_t>(j_) == field_->order();
}

CharValue MulCharacter::operator()(gf::Element x) const {
  if (x == 0) return CharValue::zero();
  return CharValue::root(exponent_at(x), field_->order());
}

std::uint32_t MulCharacter::exponent_at(gf::Element x) const {
  return static_cast<std::uint32_t>(static_cast<std::uint64_t>(j_) * field_->character_log(x) %
                                    field_->order());
}

MulCharacter MulCharacter::operator*(const MulCharacter& other) const {
  if (field_ != other.field_) throw std::invalid_argument("characters over different fields");
  return MulCharacter(*field_, static_cast<std::int64_t>(j_) + other.j_);
}

MulCharacter MulCharacter::conj() const { return MulCharacter(*field_, -static_cast<std::int64_t>(j_)); }

std::uint32_t MulCharacter::order() const {
  return field_->order() / std::gcd(j_, field_->order());
}

CharValue MulCharacter::at_minus_one() const {
  // -1 = gen^((q-1)/2) for odd q; in characteristic 2, -1 = 1.
  if (!field_->odd()) return CharValue::root(0, field_->order());
  return (*this)(field_->minus_one());
}

AddCharacter::AddCharacter(const gf::FieldTable& field, gf::Element twist) : field_(&field), a_(twist) {
  if (twist == 0 || twist >= field.q()) {
    throw std::invalid_argument("additive twist must be a nonzero element");
  }
}

CharValue AddCharacter::operator()(gf::Element x) const { return CharValue::root(exponent_at(x), field_->p()); }

std::uint32_t AddCharacter::exponent_at(gf::Element x) const {
  return field_->trace(a_ == 1 ? x : field_->mul(a_, x));
}

std::vector<MulCharacter> enumerate_characters(const gf::FieldTable& field, bool nontrivial_only) {
  std::vector<MulCharacter> out;
  out.reserve(field.order());
  for (std::uint32_t j = nontrivial_only ? 1 : 0; j < field.order(); ++j) out.emplace_back(field, j);
  return out;
}

std::uint32_t quadratic_index(const gf::FieldTable& field) {
  if (!field.odd()) throw std::invalid_argument("no quadratic character in characteristic 2");
  return field.order() / 2;
}

}  // namespace charsum::chars
