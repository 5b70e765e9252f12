#include "charsum/sums.hpp"

#include <cfloat>
#include <cmath>
#include <stdexcept>

namespace charsum::sums {

namespace {

constexpr double kEps = DBL_EPSILON;
constexpr std::uint64_t kHistogramCap = std::uint64_t{1} << 24;

using chars::MulCharacter;
using gf::Element;
using gf::FieldTable;

std::uint64_t mod(std::int64_t v, std::uint64_t m) {
  const auto mm = static_cast<std::int64_t>(m);
  const std::int64_t r = v % mm;
  return static_cast<std::uint64_t>(r < 0 ? r + mm : r);
}

void require_same_field(const MulCharacter& a, const MulCharacter& b) {
  if (&a.field() != &b.field()) throw std::invalid_argument("characters over different fields");
}

void require_nontrivial(const MulCharacter& chi, const MulCharacter& eta) {
  require_same_field(chi, eta);
  if (chi.is_trivial() || eta.is_trivial()) {
    throw std::invalid_argument("this evaluation path requires nontrivial chi and eta");
  }
}

// (-1)^(m+n-1) / q^((m+n-1)/2)
double hyper_normalisation(std::uint32_t q, std::size_t m, std::size_t n) {
  const auto k = static_cast<int>(m + n) - 1;
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign / std::pow(static_cast<double>(q), 0.5 * k);
}

const FieldTable& tuple_field(const CharTuple& chis, const CharTuple& etas) {
  if (chis.empty() && etas.empty()) throw std::invalid_argument("both character tuples are empty");
  const FieldTable& f = chis.empty() ? etas[0].field() : chis[0].field();
  if (!etas.empty() && &etas[0].field() != &f) throw std::invalid_argument("tuples over different fields");
  return f;
}

void require_hyper_args(const FieldTable& f, Element t) {
  if (t == 0 || t >= f.q()) throw std::invalid_argument("t must be a nonzero element");
}

}  // namespace

SumValue operator+(const SumValue& a, const SumValue& b) {
  const auto v = a.value() + b.value();
  return SumValue::from(v, a.err + b.err + 2 * kEps * (a.abs() + b.abs()));
}

SumValue operator-(const SumValue& a, const SumValue& b) {
  const auto v = a.value() - b.value();
  return SumValue::from(v, a.err + b.err + 2 * kEps * (a.abs() + b.abs()));
}

SumValue operator*(const SumValue& a, const SumValue& b) {
  const auto v = a.value() * b.value();
  const double err = a.abs() * b.err + b.abs() * a.err + a.err * b.err + 4 * kEps * a.abs() * b.abs();
  return SumValue::from(v, err);
}

SumValue operator*(double s, const SumValue& a) {
  return SumValue::from(s * a.value(), std::abs(s) * a.err + kEps * std::abs(s) * a.abs());
}

SumValue operator*(const chars::CharValue& c, const SumValue& a) {
  if (c.is_zero()) return SumValue{};
  const auto v = c.to_complex() * a.value();
  return SumValue::from(v, a.err + 4 * kEps * a.abs());
}

SumValue conj(const SumValue& a) {
  SumValue r = a;
  r.im = -r.im;
  r.witness.clear();
  return r;
}

double abs_diff(const SumValue& a, const SumValue& b) { return std::abs(a.value() - b.value()); }

CyclotomicAccumulator::CyclotomicAccumulator(std::uint64_t mul_order, std::uint64_t add_order)
    : mul_order_(mul_order), add_order_(add_order), mul_roots_(&chars::cached_roots(mul_order)), add_roots_(&chars::cached_roots(add_order)) {
  if (mul_order_ * add_order_ <= kHistogramCap) counts_.assign(mul_order_ * add_order_, 0);
}

void CyclotomicAccumulator::add(std::uint64_t mul_exp, std::uint64_t add_exp, int sign) {
  ++terms_;
  if (!counts_.empty()) {
    counts_[mul_exp * add_order_ + add_exp] += sign;
    return;
  }
  const auto z = static_cast<double>(sign) * (*mul_roots_)[mul_exp] * (*add_roots_)[add_exp];
  // Neumaier compensated summation, real and imaginary parts separately.
  auto step = [](double& sum, double& c, double x) {
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  };
  step(re_, re_c_, z.real());
  step(im_, im_c_, z.imag());
}

SumValue CyclotomicAccumulator::result() const {
  double re = re_, im = im_, re_c = re_c_, im_c = im_c_;
  if (!counts_.empty()) {
    auto step = [](double& sum, double& c, double x) {
      const double t = sum + x;
      c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
    };
    for (std::uint64_t a = 0; a < mul_order_; ++a) {
      for (std::uint64_t b = 0; b < add_order_; ++b) {
        const std::int64_t c = counts_[a * add_order_ + b];
        if (c == 0) continue;
        const auto z = static_cast<double>(c) * ((*mul_roots_)[a] * (*add_roots_)[b]);
        step(re, re_c, z.real());
        step(im, im_c, z.imag());
      }
    }
  }
  return SumValue{re + re_c, im + im_c, 8 * kEps * static_cast<double>(terms_), {}};
}

CharTuple::CharTuple(std::vector<chars::MulCharacter> chars) : chars_(std::move(chars)) {
  for (const auto& c : chars_) {
    if (&c.field() != &chars_.front().field()) throw std::invalid_argument("tuple spans several fields");
  }
}

bool disjoint(const CharTuple& a, const CharTuple& b) {
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (x == y) return false;
    }
  }
  return true;
}

SumValue gauss_sum(const chars::MulCharacter& chi, const chars::AddCharacter& psi) {
  const FieldTable& f = chi.field();
  if (&psi.field() != &f) throw std::invalid_argument("characters over different fields");
  CyclotomicAccumulator acc(f.order(), f.p());
  for (Element a = 1; a < f.q(); ++a) acc.add(chi.exponent_at(a), psi.exponent_at(a));
  return acc.result();
}

GaussTable::GaussTable(const gf::FieldTable& field) : field_(&field) {
  const auto psi = chars::AddCharacter::canonical(field);
  taus_.reserve(field.order());
  for (std::uint32_t j = 0; j < field.order(); ++j) taus_.push_back(gauss_sum(MulCharacter(field, j), psi));
}

const SumValue& GaussTable::at(const chars::MulCharacter& chi) const {
  if (&chi.field() != field_) throw std::invalid_argument("character over a different field");
  return taus_[chi.index()];
}

SumValue jacobi_sum(const chars::MulCharacter& chi1, const chars::MulCharacter& chi2) {
  require_same_field(chi1, chi2);
  const FieldTable& f = chi1.field();
  CyclotomicAccumulator acc(f.order(), 1);
  for (Element a = 1; a < f.q(); ++a) {
    const Element b = f.plus_one(f.neg(a));
    if (b == 0) continue;
    acc.add_mul((chi1.exponent_at(a) + static_cast<std::uint64_t>(chi2.exponent_at(b))) % f.order());
  }
  return acc.result();
}

SumValue jacobi_via_gauss(const chars::MulCharacter& chi1, const chars::MulCharacter& chi2,
                          const chars::AddCharacter& psi) {
  require_same_field(chi1, chi2);
  if (&psi.field() != &chi1.field()) throw std::invalid_argument("characters over different fields");
  if (chi1.is_trivial() && chi2.is_trivial()) {
    throw std::invalid_argument("the Gauss-sum expression does not cover two trivial characters");
  }
  const double q = chi1.field().q();
  return (1.0 / q) * (gauss_sum(chi1, psi) * gauss_sum(chi2, psi) * conj(gauss_sum(chi1 * chi2, psi)));
}

SumValue hyper_naive(gf::Element t, const CharTuple& chis, const CharTuple& etas) {
  const FieldTable& f = tuple_field(chis, etas);
  require_hyper_args(f, t);
  const std::uint32_t ord = f.order();
  const std::uint32_t p = f.p();
  const std::size_t m = chis.size(), n = etas.size();

  // Coordinates in order x_1..x_m, y_1..y_n; the last one is solved.
  struct Coord {
    const MulCharacter* chi;
    bool lower;
  };
  std::vector<Coord> coords;
  for (const auto& c : chis) coords.push_back({&c, false});
  for (const auto& c : etas) coords.push_back({&c, true});
  const std::size_t free = coords.size() - 1;
  const Coord last = coords.back();

  // Per coordinate and per discrete log: signed character exponent and signed trace.
  std::vector<std::vector<std::uint32_t>> char_exp(free, std::vector<std::uint32_t>(ord));
  std::vector<std::uint32_t> tr_plus(ord);
  for (std::uint32_t a = 0; a < ord; ++a) tr_plus[a] = f.trace(f.exp(a));
  for (std::size_t i = 0; i < free; ++i) {
    for (std::uint32_t a = 0; a < ord; ++a) {
      const std::uint32_t e = coords[i].chi->exponent_at(f.exp(a));
      char_exp[i][a] = coords[i].lower ? (e == 0 ? 0 : ord - e) : e;
    }
  }
  const std::uint64_t log_t = f.log(t);

  CyclotomicAccumulator acc(ord, p);
  std::vector<std::uint32_t> logs(free, 0);
  while (true) {
    // Constraint N(x) = t N(y) solved for the last coordinate.
    std::int64_t lx = 0, ly = 0;
    std::uint64_t ce = 0;
    std::int64_t tr = 0;
    for (std::size_t i = 0; i < free; ++i) {
      if (coords[i].lower) {
        ly += logs[i];
        tr -= tr_plus[logs[i]];
      } else {
        lx += logs[i];
        tr += tr_plus[logs[i]];
      }
      ce += char_exp[i][logs[i]];
    }
    std::uint64_t l_last;
    if (last.lower) {
      l_last = mod(lx - ly - static_cast<std::int64_t>(log_t), ord);
      tr -= tr_plus[l_last];
    } else {
      l_last = mod(static_cast<std::int64_t>(log_t) + ly - lx, ord);
      tr += tr_plus[l_last];
    }
    const std::uint32_t e_last = last.chi->exponent_at(f.exp(l_last));
    ce += last.lower ? (e_last == 0 ? 0 : ord - e_last) : e_last;
    acc.add(ce % ord, mod(tr, p));

    std::size_t i = 0;
    while (i < free && ++logs[i] == ord) logs[i++] = 0;
    if (i == free) break;
  }
  return hyper_normalisation(f.q(), m, n) * acc.result();
}

SumValue hyper_mellin(const GaussTable& table, gf::Element t, const CharTuple& chis,
                      const CharTuple& etas) {
  const FieldTable& f = tuple_field(chis, etas);
  if (&table.field() != &f) throw std::invalid_argument("Gauss table over a different field");
  require_hyper_args(f, t);
  const std::uint32_t ord = f.order();
  SumValue total;
  for (std::uint32_t r = 0; r < ord; ++r) {
    const MulCharacter rho(f, r);
    SumValue term = SumValue::exact(1.0);
    for (const auto& c : chis) term = term * table[(c.index() + r) % ord];
    for (const auto& c : etas) term = term * conj(table[(c.index() + r) % ord]);
    total = total + rho(t).conj() * term;
  }
  return (hyper_normalisation(f.q(), chis.size(), etas.size()) / static_cast<double>(ord)) * total;
}

std::vector<SumValue> hyper_mellin_profile(const GaussTable& table, const CharTuple& chis,
                                           const CharTuple& etas) {
  const FieldTable& f = tuple_field(chis, etas);
  if (&table.field() != &f) throw std::invalid_argument("Gauss table over a different field");
  const std::uint32_t ord = f.order();
  std::vector<SumValue> coeff(ord);
  double mass = 0.0, coeff_err = 0.0;
  for (std::uint32_t r = 0; r < ord; ++r) {
    SumValue term = SumValue::exact(1.0);
    for (const auto& c : chis) term = term * table[(c.index() + r) % ord];
    for (const auto& c : etas) term = term * conj(table[(c.index() + r) % ord]);
    mass += term.abs();
    coeff_err += term.err;
    coeff[r] = std::move(term);
  }
  const chars::RootTable& roots = chars::cached_roots(ord);
  const double scale = hyper_normalisation(f.q(), chis.size(), etas.size()) / static_cast<double>(ord);
  const double err = std::abs(scale) * (coeff_err + (2.0 * ord + 4.0) * kEps * mass);
  std::vector<SumValue> out(f.q());
  for (std::uint32_t s = 0; s < ord; ++s) {
    std::complex<double> acc = 0.0;
    for (std::uint32_t r = 0; r < ord; ++r) {
      const std::uint64_t e = (ord - (static_cast<std::uint64_t>(r) * s) % ord) % ord;
      acc += roots[e] * coeff[r].value();
    }
    out[f.exp(s)] = SumValue::from(scale * acc, err);
  }
  return out;
}

SumValue g_direct(const chars::MulCharacter& chi, const chars::MulCharacter& eta, GForm form) {
  require_same_field(chi, eta);
  const FieldTable& f = chi.field();
  const std::uint32_t ord = f.order();
  const Element m1 = f.minus_one();
  CyclotomicAccumulator acc(ord, 1);

  switch (form) {
    case GForm::product: {
      // ratio[u] = exponent of chi(u) conj(chi)(u+1), or -1 when u or u+1 is zero.
      std::vector<std::int64_t> ratio(f.q(), -1);
      for (Element u = 1; u < f.q(); ++u) {
        const Element u1 = f.plus_one(u);
        if (u1 == 0) continue;
        ratio[u] = mod(static_cast<std::int64_t>(chi.exponent_at(u)) - chi.exponent_at(u1), ord);
      }
      for (Element u = 0; u < f.q(); ++u) {
        if (ratio[u] < 0) continue;
        for (Element v = 0; v < f.q(); ++v) {
          if (ratio[v] < 0) continue;
          const Element w = f.add(f.mul(u, v), m1);
          if (w == 0) continue;
          acc.add_mul(mod(ratio[u] - ratio[v] + eta.exponent_at(w), ord));
        }
      }
      break;
    }
    case GForm::fraction: {
      for (Element u = 0; u < f.q(); ++u) {
        for (Element v = 0; v < f.q(); ++v) {
          const Element num = f.mul(u, f.plus_one(v));
          const Element den = f.mul(v, f.plus_one(u));
          if (num == 0 || den == 0) continue;
          const Element w = f.add(f.mul(u, v), m1);
          if (w == 0) continue;
          acc.add_mul((static_cast<std::uint64_t>(chi.exponent_at(f.div(num, den))) + eta.exponent_at(w)) %
                      ord);
        }
      }
      break;
    }
    case GForm::ci: {
      const MulCharacter chib = chi.conj();
      for (Element u = 0; u < f.q(); ++u) {
        for (Element v = 0; v < f.q(); ++v) {
          const auto term = chi(u) * chib(f.plus_one(u)) * chib(v) * chi(f.plus_one(v)) *
                            eta(f.add(f.mul(u, v), m1));
          if (term.is_zero()) continue;
          acc.add_mul(term.promoted(ord).exponent());
        }
      }
      break;
    }
  }
  return acc.result();
}

SumValue g_jacobi_triple(const chars::MulCharacter& chi, const chars::MulCharacter& eta) {
  require_nontrivial(chi, eta);
  const FieldTable& f = chi.field();
  const MulCharacter chib = chi.conj();
  SumValue total;
  for (std::uint32_t r = 0; r < f.order(); ++r) {
    const MulCharacter rho(f, r);
    total = total + jacobi_sum(rho, eta) * jacobi_sum(rho, chib) * jacobi_sum(rho, chi);
  }
  return eta.at_minus_one() * ((1.0 / f.order()) * total);
}

JacobiTable::JacobiTable(const gf::FieldTable& field) : field_(&field), order_(field.order()) {
  js_.reserve(static_cast<std::size_t>(order_) * order_);
  for (std::uint32_t a = 0; a < order_; ++a) {
    for (std::uint32_t b = 0; b < order_; ++b) js_.push_back(jacobi_sum(MulCharacter(field, a), MulCharacter(field, b)));
  }
}

SumValue g_jacobi_triple(const JacobiTable& table, const chars::MulCharacter& chi,
                         const chars::MulCharacter& eta) {
  require_nontrivial(chi, eta);
  const FieldTable& f = chi.field();
  if (&table.field() != &f) throw std::invalid_argument("Jacobi table over a different field");
  const std::uint32_t ord = f.order();
  const std::uint32_t j = chi.index(), e = eta.index(), jb = chi.conj().index();
  SumValue total;
  for (std::uint32_t r = 0; r < ord; ++r) total = total + table(r, e) * table(r, jb) * table(r, j);
  return eta.at_minus_one() * ((1.0 / ord) * total);
}

SumValue g_gauss_form(const GaussTable& table, const chars::MulCharacter& chi,
                      const chars::MulCharacter& eta) {
  require_nontrivial(chi, eta);
  const FieldTable& f = chi.field();
  if (&table.field() != &f) throw std::invalid_argument("Gauss table over a different field");
  const std::uint32_t ord = f.order();
  const std::uint32_t j = chi.index(), e = eta.index();
  SumValue total;
  for (std::uint32_t r = 0; r < ord; ++r) {
    const SumValue& tr = table[r];
    const SumValue lower = table[(r + e) % ord] * table[(r + ord - j) % ord] * table[(r + j) % ord];
    total = total + tr * tr * tr * conj(lower);
  }
  const double q = f.q();
  const SumValue pre = table.at(eta) * table.at(chi.conj()) * table.at(chi);
  return eta.at_minus_one() * ((1.0 / (q * q * q * ord)) * (pre * total));
}

CharTuple theorem_upper(const gf::FieldTable& field) {
  const MulCharacter one(field, 0);
  return CharTuple{one, one, one};
}

CharTuple theorem_lower(const chars::MulCharacter& chi, const chars::MulCharacter& eta,
                        TheoremForm form) {
  if (form == TheoremForm::printed) return CharTuple{eta.conj(), chi, chi.conj()};
  return CharTuple{eta, chi.conj(), chi};
}

SumValue theorem_rhs(const GaussTable& table, const chars::MulCharacter& chi,
                     const chars::MulCharacter& eta, TheoremForm form, HyperPath path) {
  require_nontrivial(chi, eta);
  const FieldTable& f = chi.field();
  const CharTuple upper = theorem_upper(f);
  const CharTuple lower = theorem_lower(chi, eta, form);
  const SumValue h =
      path == HyperPath::mellin ? hyper_mellin(table, 1, upper, lower) : hyper_naive(1, upper, lower);
  const double scale = (form == TheoremForm::printed ? 1.0 : -1.0) * std::sqrt(static_cast<double>(f.q()));
  return (chi.at_minus_one() * eta.at_minus_one()) * (scale * (table.at(eta) * h));
}

SumValue s_sum(const chars::MulCharacter& chi, const chars::MulCharacter& eta,
               const chars::MulCharacter& rho, const gf::QuadExtension& ext) {
  require_same_field(chi, eta);
  const FieldTable& k = *ext.base;
  const FieldTable& big = *ext.ext;
  if (&chi.field() != &k) throw std::invalid_argument("chi and eta must live on the base field");
  if (&rho.field() != &big) throw std::invalid_argument("rho must live on the quadratic extension");
  if (!k.odd()) throw std::invalid_argument("the S sum needs odd q");

  const std::uint64_t ord2 = big.order();
  const std::uint64_t lift = ord2 / k.order();  // q + 1
  const MulCharacter etab = eta.conj();
  CyclotomicAccumulator acc(ord2, 1);
  for (Element alpha = 0; alpha < k.q(); ++alpha) {
    const Element z = big.add(ext.embed_element(alpha), ext.omega);
    if (z == 0) continue;
    const std::uint64_t outer = rho.exponent_at(z);
    const Element a2 = k.mul(alpha, alpha);
    for (Element t = 0; t < k.q(); ++t) {
      if (t == 0) continue;
      const Element one_minus_t = k.plus_one(k.neg(t));
      if (one_minus_t == 0) continue;
      const Element arg = k.sub(a2, k.mul(ext.delta, t));
      if (arg == 0) continue;
      const std::uint64_t inner =
          static_cast<std::uint64_t>(chi.exponent_at(t)) + eta.exponent_at(arg) + etab.exponent_at(one_minus_t);
      acc.add_mul((outer + lift * inner) % ord2);
    }
  }
  return acc.result();
}

}  // namespace charsum::sums
