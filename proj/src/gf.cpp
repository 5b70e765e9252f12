#include "charsum/gf.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace charsum::gf {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod64(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod64(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e != 0) {
    if (e & 1) r = mulmod64(r, a, m);
    a = mulmod64(a, a, m);
    e >>= 1;
  }
  return r;
}

// Dense polynomials over GF(p), constant term first, no trailing zeros
// (the zero polynomial is empty).
using Poly = std::vector<std::uint32_t>;

void trim(Poly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

u64 inverse_mod(u64 a, u64 p) { return powmod64(a, p - 2, p); }

Poly poly_rem(Poly a, const Poly& m, std::uint32_t p) {
  trim(a);
  const std::size_t dm = m.size() - 1;
  const u64 lead_inv = inverse_mod(m.back(), p);
  while (a.size() >= m.size()) {
    const u64 c = mulmod64(a.back(), lead_inv, p);
    const std::size_t shift = a.size() - 1 - dm;
    for (std::size_t i = 0; i <= dm; ++i) {
      const u64 sub = mulmod64(c, m[i], p);
      a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + p - sub) % p);
    }
    trim(a);
  }
  return a;
}

Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& m, std::uint32_t p) {
  if (a.empty() || b.empty()) return {};
  std::vector<u64> prod(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      prod[i + j] = (prod[i + j] + static_cast<u64>(a[i]) * b[j]) % p;
    }
  }
  Poly r(prod.begin(), prod.end());
  return poly_rem(std::move(r), m, p);
}

Poly poly_powmod(Poly base, u64 e, const Poly& m, std::uint32_t p) {
  Poly r{1};
  base = poly_rem(std::move(base), m, p);
  while (e != 0) {
    if (e & 1) r = poly_mulmod(r, base, m, p);
    base = poly_mulmod(base, base, m, p);
    e >>= 1;
  }
  return r;
}

Poly poly_gcd(Poly a, Poly b, std::uint32_t p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_rem(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (u64 small : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % small == 0) return n == small;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These bases are sufficient for every n < 2^64.
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<std::uint64_t> prime_divisors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (u64 d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

bool is_irreducible(std::span<const std::uint32_t> monic, std::uint32_t p) {
  if (monic.size() < 2 || monic.back() != 1) return false;
  for (auto c : monic) {
    if (c >= p) return false;
  }
  const std::size_t n = monic.size() - 1;
  if (n == 1) return true;
  if (monic[0] == 0) return false;
  const Poly f(monic.begin(), monic.end());
  const Poly x{0, 1};
  Poly h = x;
  for (std::size_t i = 1; i <= n / 2; ++i) {
    h = poly_powmod(h, p, f, p);
    Poly diff = h;
    diff.resize(std::max<std::size_t>(diff.size(), 2), 0);
    diff[1] = (diff[1] + p - 1) % p;
    trim(diff);
    if (diff.empty()) return false;
    if (poly_gcd(f, diff, p).size() > 1) return false;
  }
  return true;
}

std::vector<std::uint32_t> smallest_irreducible(std::uint32_t p, std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("degree must be at least 1");
  u64 count = 1;
  for (std::uint32_t i = 0; i < n; ++i) count *= p;
  std::vector<std::uint32_t> f(n + 1, 0);
  f[n] = 1;
  for (u64 idx = 0; idx < count; ++idx) {
    // c0 is the most significant position of the lexicographic order.
    u64 rest = idx;
    for (std::uint32_t i = n; i-- > 0;) {
      f[i] = static_cast<std::uint32_t>(rest % p);
      rest /= p;
    }
    if (is_irreducible(f, p)) return f;
  }
  throw std::logic_error("no irreducible polynomial found");
}

FieldTable FieldTable::build(std::uint32_t p, std::uint32_t n,
                             std::optional<std::vector<std::uint32_t>> modulus) {
  if (!is_prime(p)) throw std::invalid_argument("p = " + std::to_string(p) + " is not prime");
  if (n == 0) throw std::invalid_argument("extension degree must be at least 1");
  u64 q = 1;
  for (std::uint32_t i = 0; i < n; ++i) {
    q *= p;
    if (q > kMaxFieldSize) {
      throw std::invalid_argument("field size exceeds the cap of 2^20 elements");
    }
  }
  FieldTable t;
  t.spec_.p = p;
  t.spec_.n = n;
  t.spec_.q = static_cast<std::uint32_t>(q);
  if (modulus) {
    if (modulus->size() != n + 1 || !is_irreducible(*modulus, p)) {
      throw std::invalid_argument("supplied modulus is not a monic irreducible of degree n");
    }
    t.spec_.modulus = std::move(*modulus);
  } else {
    t.spec_.modulus = smallest_irreducible(p, n);
  }
  t.pow_p_.resize(n + 1);
  t.pow_p_[0] = 1;
  for (std::uint32_t i = 1; i <= n; ++i) t.pow_p_[i] = t.pow_p_[i - 1] * p;
  t.build_derived();
  t.build_tables();
  return t;
}

FieldTable FieldTable::from_exp_table(const FieldSpec& spec, Element gen, std::vector<Element> exp) {
  FieldTable t = build(spec.p, spec.n, spec.modulus);
  if (t.spec_ != spec) throw std::invalid_argument("field header is inconsistent");
  if (exp.size() != t.order() || exp.empty() || exp[0] != 1) {
    throw std::invalid_argument("exp table has the wrong shape");
  }
  for (std::size_t k = 1; k < exp.size(); ++k) {
    if (exp[k] != t.poly_mul(exp[k - 1], gen)) {
      throw std::invalid_argument("exp table is not the power sequence of gen");
    }
  }
  if (t.poly_mul(exp.back(), gen) != 1) throw std::invalid_argument("gen order mismatch");
  t.gen_ = gen;
  t.exp_ = std::move(exp);
  std::vector<std::uint32_t> log(t.q(), 0);
  std::vector<bool> seen(t.q(), false);
  for (std::uint32_t a = 0; a < t.order(); ++a) {
    const Element x = t.exp_[a];
    if (x == 0 || x >= t.q() || seen[x]) throw std::invalid_argument("exp table is not a bijection");
    seen[x] = true;
    log[x] = a;
  }
  t.log_ = std::move(log);
  t.trace_.clear();
  t.build_tables();  // recomputes trace from the stored exp/log
  return t;
}

void FieldTable::build_derived() {
  const std::uint32_t q = spec_.q;
  neg_.resize(q);
  plus_one_.resize(q);
  for (Element a = 0; a < q; ++a) {
    Element r = 0;
    for (std::uint32_t i = 0; i < spec_.n; ++i) {
      const std::uint32_t d = (a / pow_p_[i]) % spec_.p;
      r += ((spec_.p - d) % spec_.p) * pow_p_[i];
    }
    neg_[a] = r;
    plus_one_[a] = add(a, 1);
  }
}

Element FieldTable::poly_mul(Element a, Element b) const {
  const std::uint32_t p = spec_.p;
  if (spec_.n == 1) return static_cast<Element>(static_cast<u64>(a) * b % p);
  const Poly f(spec_.modulus.begin(), spec_.modulus.end());
  Poly pa = digits(a), pb = digits(b);
  trim(pa);
  trim(pb);
  Poly r = poly_mulmod(pa, pb, f, p);
  r.resize(spec_.n, 0);
  return from_digits(r);
}

void FieldTable::build_tables() {
  const std::uint32_t q = spec_.q;
  const std::uint32_t ord = q - 1;
  if (exp_.empty()) {
    const auto divisors = prime_divisors(ord);
    auto power = [&](Element g, u64 e) {
      Element r = 1;
      while (e != 0) {
        if (e & 1) r = poly_mul(r, g);
        g = poly_mul(g, g);
        e >>= 1;
      }
      return r;
    };
    gen_ = 0;
    for (Element g = 1; g < q; ++g) {
      bool full = true;
      for (u64 d : divisors) {
        if (power(g, ord / d) == 1) {
          full = false;
          break;
        }
      }
      if (full) {
        gen_ = g;
        break;
      }
    }
    if (gen_ == 0) throw std::logic_error("no generator found; modulus is not irreducible");
    exp_.resize(ord);
    log_.assign(q, 0);
    Element x = 1;
    for (std::uint32_t a = 0; a < ord; ++a) {
      exp_[a] = x;
      log_[x] = a;
      x = poly_mul(x, gen_);
    }
    if (x != 1) throw std::logic_error("generator order mismatch");
  }
  trace_.assign(q, 0);
  for (Element x = 1; x < q; ++x) {
    Element acc = 0;
    u64 e = log_[x];
    for (std::uint32_t i = 0; i < spec_.n; ++i) {
      acc = add(acc, exp_[e % ord]);
      e = e * spec_.p % ord;
    }
    if (acc >= spec_.p) throw std::logic_error("trace left the prime subfield");
    trace_[x] = acc;
  }
}

Element FieldTable::add(Element a, Element b) const {
  const std::uint32_t p = spec_.p;
  if (p == 2) return a ^ b;
  if (spec_.n == 1) {
    const Element s = a + b;
    return s >= p ? s - p : s;
  }
  Element r = 0;
  for (std::uint32_t i = 0; i < spec_.n; ++i) {
    std::uint32_t d = a % p + b % p;
    if (d >= p) d -= p;
    r += d * pow_p_[i];
    a /= p;
    b /= p;
  }
  return r;
}

Element FieldTable::sub(Element a, Element b) const { return add(a, neg_[b]); }

Element FieldTable::mul(Element a, Element b) const {
  if (a == 0 || b == 0) return 0;
  std::uint32_t e = log_[a] + log_[b];
  if (e >= order()) e -= order();
  return exp_[e];
}

Element FieldTable::inv(Element a) const {
  if (a == 0) throw std::domain_error("inversion of zero");
  const std::uint32_t la = log_[a];
  return exp_[la == 0 ? 0 : order() - la];
}

Element FieldTable::pow(Element a, std::uint64_t e) const {
  if (a == 0) return e == 0 ? 1 : 0;
  return exp_[mulmod64(log_[a], e % order(), order())];
}

std::vector<std::uint32_t> FieldTable::digits(Element x) const {
  std::vector<std::uint32_t> d(spec_.n, 0);
  for (std::uint32_t i = 0; i < spec_.n; ++i) {
    d[i] = x % spec_.p;
    x /= spec_.p;
  }
  return d;
}

Element FieldTable::from_digits(std::span<const std::uint32_t> digits) const {
  Element r = 0;
  for (std::size_t i = 0; i < digits.size() && i < spec_.n; ++i) r += (digits[i] % spec_.p) * pow_p_[i];
  return r;
}

FieldTable FieldTable::with_character_log_override(Element x, std::uint32_t new_log) const {
  if (x == 0 || x >= q()) throw std::invalid_argument("override target must be a nonzero element");
  FieldTable copy = *this;
  copy.override_element_ = x;
  copy.override_log_ = new_log % order();
  return copy;
}

Element field_op(const FieldTable& tbl, FieldOp kind, Element a, std::uint64_t b) {
  if (a >= tbl.q()) throw std::invalid_argument("operand is not an element code");
  switch (kind) {
    case FieldOp::add:
      return tbl.add(a, static_cast<Element>(b));
    case FieldOp::mul:
      return tbl.mul(a, static_cast<Element>(b));
    case FieldOp::neg:
      return tbl.neg(a);
    case FieldOp::inv:
      return tbl.inv(a);
    case FieldOp::pow:
      return tbl.pow(a, b);
  }
  throw std::invalid_argument("unknown field operation");
}

QuadExtension build_quadratic_extension(FieldPtr base) {
  if (!base) throw std::invalid_argument("null base field");
  if (!base->odd()) throw std::invalid_argument("quadratic extension requires odd q");
  const FieldTable& k = *base;
  QuadExtension out;
  out.base = base;
  out.ext = make_field(k.p(), 2 * k.n());
  const FieldTable& e = *out.ext;

  // Non-squares are exactly the odd powers of the generator.
  for (Element x = 1; x < k.q(); ++x) {
    if (k.log(x) % 2 == 1) {
      out.delta = x;
      break;
    }
  }
  if (k.pow(out.delta, k.order() / 2) != k.minus_one()) {
    throw std::logic_error("delta is not a non-square");
  }

  const auto& f = k.spec().modulus;
  Element root = 0;
  bool found = false;
  for (Element r = 0; r < e.q() && !found; ++r) {
    Element acc = 0;
    for (std::size_t i = f.size(); i-- > 0;) acc = e.add(e.mul(acc, r), f[i]);
    if (acc == 0) {
      root = r;
      found = true;
    }
  }
  if (!found) throw std::logic_error("base modulus has no root in the extension");

  out.embed.resize(k.q());
  for (Element x = 0; x < k.q(); ++x) {
    const auto d = k.digits(x);
    Element acc = 0;
    for (std::size_t i = d.size(); i-- > 0;) acc = e.add(e.mul(acc, root), d[i]);
    out.embed[x] = acc;
  }

  const Element target = out.embed[out.delta];
  found = false;
  for (Element w = 1; w < e.q(); ++w) {
    if (e.mul(w, w) == target) {
      out.omega = w;
      found = true;
      break;
    }
  }
  if (!found) throw std::logic_error("delta has no square root in the extension");
  if (std::find(out.embed.begin(), out.embed.end(), out.omega) != out.embed.end()) {
    throw std::logic_error("omega lies in the base field");
  }
  return out;
}

nlohmann::json dump_json(const FieldTable& tbl) {
  nlohmann::json doc;
  doc["format"] = "charsum.field";
  doc["version"] = 1;
  doc["p"] = tbl.p();
  doc["n"] = tbl.n();
  doc["modulus"] = tbl.spec().modulus;
  doc["gen"] = tbl.gen();
  doc["exp"] = std::vector<Element>(tbl.exp_table().begin(), tbl.exp_table().end());
  return doc;
}

FieldTable load_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "charsum.field" || doc.value("version", 0) != 1) {
    throw std::invalid_argument("not a version-1 charsum field dump");
  }
  FieldSpec spec;
  spec.p = doc.at("p").get<std::uint32_t>();
  spec.n = doc.at("n").get<std::uint32_t>();
  spec.modulus = doc.at("modulus").get<std::vector<std::uint32_t>>();
  u64 q = 1;
  for (std::uint32_t i = 0; i < spec.n; ++i) {
    q *= spec.p;
    if (q > kMaxFieldSize) throw std::invalid_argument("field size exceeds the cap");
  }
  spec.q = static_cast<std::uint32_t>(q);
  return FieldTable::from_exp_table(spec, doc.at("gen").get<Element>(),
                                    doc.at("exp").get<std::vector<Element>>());
}

}  // namespace charsum::gf
