#include <doctest.h>

#include <cfloat>
#include <cmath>
#include <complex>

#include "charsum/sums.hpp"
#include "oracle.hpp"

using namespace charsum;
using chars::AddCharacter;
using chars::MulCharacter;
using sums::CharTuple;
using sums::SumValue;

namespace {

using cplx = std::complex<double>;

std::vector<gf::FieldTable> fields_up_to(std::uint32_t max_q, bool odd_only = false) {
  std::vector<gf::FieldTable> out;
  for (std::uint32_t p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u, 41u, 43u, 47u, 53u, 59u, 61u,
                          67u, 71u, 73u, 79u}) {
    if (odd_only && p == 2) continue;
    std::uint64_t q = p;
    for (std::uint32_t n = 1; q <= max_q; ++n, q *= p) out.push_back(gf::FieldTable::build(p, n));
  }
  return out;
}

bool close(const SumValue& a, cplx b, double tol) { return std::abs(a.value() - b) <= tol; }

}  // namespace

TEST_CASE("SumValue error propagation") {
  const auto a = SumValue{1.0, 0.0, 1e-10, {}};
  const auto b = SumValue{0.0, 2.0, 2e-10, {}};
  const auto c = a * b;
  CHECK(c.value() == cplx(0.0, 2.0));
  CHECK(c.err >= 1.0 * 2e-10 + 2.0 * 1e-10);
  CHECK((a + b).err >= 3e-10);
  CHECK(sums::conj(b).im == -2.0);
  sums::CyclotomicAccumulator acc(4, 3);
  for (int i = 0; i < 10; ++i) acc.add(i % 4, i % 3);
  CHECK(acc.result().err >= 10 * 8 * DBL_EPSILON);
}

TEST_CASE("gauss_sum") {
  SUBCASE("trivial character gives -1") {
    for (auto& f : fields_up_to(81)) {
      const auto tau = sums::gauss_sum(MulCharacter(f, 0), AddCharacter::canonical(f));
      CHECK(close(tau, -1.0, tau.err));
    }
  }
  SUBCASE("GF(3) quadratic is i sqrt 3") {
    auto f = gf::FieldTable::build(3, 1);
    const auto tau = sums::gauss_sum(MulCharacter(f, 1), AddCharacter::canonical(f));
    CHECK(close(tau, cplx(0.0, std::sqrt(3.0)), 1e-15));
  }
  SUBCASE("magnitude sqrt q for nontrivial characters and twists") {
    for (auto& f : fields_up_to(81)) {
      CAPTURE(f.q());
      const double root_q = std::sqrt(static_cast<double>(f.q()));
      for (gf::Element a : {gf::Element{1}, f.gen()}) {
        const AddCharacter psi(f, a);
        for (const auto& chi : chars::enumerate_characters(f, true)) {
          CHECK(std::abs(sums::gauss_sum(chi, psi).abs() - root_q) <= 1e-9 * root_q);
        }
      }
    }
  }
  SUBCASE("conjugation rule conj tau(l) = l(-1) tau(conj l)") {
    for (auto& f : fields_up_to(27)) {
      const sums::GaussTable table(f);
      for (const auto& l : chars::enumerate_characters(f, false)) {
        const auto lhs = sums::conj(table.at(l));
        const auto rhs = l.at_minus_one() * table.at(l.conj());
        CHECK(sums::abs_diff(lhs, rhs) <= lhs.err + rhs.err);
      }
    }
  }
  SUBCASE("matches oracle on prime fields") {
    for (std::uint32_t p : {3u, 5u, 7u, 11u, 13u}) {
      auto f = gf::FieldTable::build(p, 1);
      const oracle::PrimeField o(p);
      for (std::uint32_t j = 0; j < p - 1; ++j) {
        CHECK(close(sums::gauss_sum(MulCharacter(f, j), AddCharacter::canonical(f)), o.gauss(j), 1e-12));
      }
    }
  }
  SUBCASE("mismatched fields") {
    auto f = gf::FieldTable::build(5, 1);
    auto g = gf::FieldTable::build(5, 1);
    CHECK_THROWS_AS(sums::gauss_sum(MulCharacter(f, 1), AddCharacter::canonical(g)), std::invalid_argument);
  }
}

TEST_CASE("jacobi_sum and jacobi_via_gauss") {
  SUBCASE("J(1,1) = q - 2 exactly") {
    for (auto& f : fields_up_to(81)) {
      const MulCharacter one(f, 0);
      const auto j = sums::jacobi_sum(one, one);
      CHECK(j.re == static_cast<double>(f.q()) - 2.0);
      CHECK(j.im == 0.0);
      CHECK_THROWS_AS(sums::jacobi_via_gauss(one, one, AddCharacter::canonical(f)), std::invalid_argument);
    }
  }
  SUBCASE("GF(3) quadratic pair is 1") {
    auto f = gf::FieldTable::build(3, 1);
    const MulCharacter quad(f, 1);
    CHECK(close(sums::jacobi_sum(quad, quad), 1.0, 1e-15));
    CHECK(close(sums::jacobi_via_gauss(quad, quad, AddCharacter::canonical(f)), 1.0, 1e-14));
  }
  SUBCASE("J(chi, conj chi) = -chi(-1)") {
    for (auto& f : fields_up_to(27)) {
      for (const auto& chi : chars::enumerate_characters(f, true)) {
        const cplx expect = -chi.at_minus_one().to_complex();
        CHECK(close(sums::jacobi_sum(chi, chi.conj()), expect, 1e-12));
        CHECK(close(sums::jacobi_via_gauss(chi, chi.conj(), AddCharacter::canonical(f)), expect, 1e-12));
      }
    }
  }
  SUBCASE("both routes agree for every admissible pair and several psi, q <= 27") {
    for (auto& f : fields_up_to(27)) {
      CAPTURE(f.q());
      for (gf::Element a : {gf::Element{1}, f.gen(), f.minus_one()}) {
        const AddCharacter psi(f, a);
        for (const auto& c1 : chars::enumerate_characters(f, false)) {
          for (const auto& c2 : chars::enumerate_characters(f, false)) {
            if (c1.is_trivial() && c2.is_trivial()) continue;
            const auto lhs = sums::jacobi_sum(c1, c2);
            const auto rhs = sums::jacobi_via_gauss(c1, c2, psi);
            CHECK(sums::abs_diff(lhs, rhs) <= lhs.err + rhs.err);
          }
        }
      }
    }
  }
  SUBCASE("matches oracle") {
    const oracle::PrimeField o(11);
    auto f = gf::FieldTable::build(11, 1);
    for (std::uint32_t a = 0; a < 10; ++a) {
      for (std::uint32_t b = 0; b < 10; ++b) {
        CHECK(close(sums::jacobi_sum(MulCharacter(f, a), MulCharacter(f, b)), o.jacobi(a, b), 1e-12));
      }
    }
  }
}

TEST_CASE("hyper_naive") {
  SUBCASE("m = n = 1, trivial upper, t = 1 vanishes") {
    for (auto& f : fields_up_to(27)) {
      for (const auto& eta : chars::enumerate_characters(f, true)) {
        const auto h = sums::hyper_naive(1, CharTuple{MulCharacter(f, 0)}, CharTuple{eta});
        CHECK(close(h, 0.0, h.err + 1e-14));
      }
    }
  }
  SUBCASE("m = n = 1, trivial upper, t != 1 is a scaled Gauss sum") {
    for (auto& f : fields_up_to(27, true)) {
      const sums::GaussTable table(f);
      const double q = f.q();
      for (const auto& eta : chars::enumerate_characters(f, true)) {
        for (gf::Element t = 2; t < f.q(); ++t) {
          const auto h = sums::hyper_naive(t, CharTuple{MulCharacter(f, 0)}, CharTuple{eta});
          const cplx expect =
              -eta(f.sub(t, 1)).to_complex() * table.at(eta.conj()).value() / std::sqrt(q);
          CHECK(close(h, expect, 1e-12));
        }
      }
    }
  }
  SUBCASE("theorem configuration at GF(3) is 0") {
    auto f = gf::FieldTable::build(3, 1);
    const MulCharacter one(f, 0), quad(f, 1);
    const auto h = sums::hyper_naive(1, CharTuple{one, one, one}, CharTuple{quad.conj(), quad, quad.conj()});
    CHECK(close(h, 0.0, 1e-14));
  }
  SUBCASE("matches full-enumeration oracle with unequal tuple lengths") {
    for (std::uint32_t p : {5u, 7u}) {
      auto f = gf::FieldTable::build(p, 1);
      const oracle::PrimeField o(p);
      for (std::int64_t t : {1, 2, 3}) {
        for (const auto& [up, low] : std::vector<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>>{
                 {{1, 2}, {3}}, {{0}, {1, 2}}, {{1, 3}, {}}, {{}, {2}}, {{0, 0}, {1, 3}}}) {
          std::vector<MulCharacter> cu, cl;
          for (auto j : up) cu.emplace_back(f, j);
          for (auto j : low) cl.emplace_back(f, j);
          CHECK(close(sums::hyper_naive(static_cast<gf::Element>(t), CharTuple(cu), CharTuple(cl)),
                      o.hyper(t, up, low), 1e-12));
        }
      }
    }
  }
  SUBCASE("errors") {
    auto f = gf::FieldTable::build(5, 1);
    CHECK_THROWS_AS(sums::hyper_naive(0, CharTuple{MulCharacter(f, 0)}, CharTuple{MulCharacter(f, 1)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(sums::hyper_naive(1, CharTuple{}, CharTuple{}), std::invalid_argument);
  }
}

TEST_CASE("hyper_mellin") {
  SUBCASE("agrees with hyper_naive for every m = n = 1 configuration, q <= 16") {
    for (auto& f : fields_up_to(16)) {
      const sums::GaussTable table(f);
      for (const auto& c : chars::enumerate_characters(f, false)) {
        for (const auto& e : chars::enumerate_characters(f, false)) {
          for (gf::Element t = 1; t < f.q(); ++t) {
            const CharTuple up{c}, low{e};
            CHECK(sums::abs_diff(sums::hyper_mellin(table, t, up, low), sums::hyper_naive(t, up, low)) <= 1e-6);
          }
        }
      }
    }
  }
  SUBCASE("agrees with hyper_naive for mixed lengths") {
    auto f = gf::FieldTable::build(7, 1);
    const sums::GaussTable table(f);
    const CharTuple up{MulCharacter(f, 1), MulCharacter(f, 2)}, low{MulCharacter(f, 5)};
    for (gf::Element t = 1; t < 7; ++t) {
      CHECK(sums::abs_diff(sums::hyper_mellin(table, t, up, low), sums::hyper_naive(t, up, low)) <= 1e-9);
      CHECK(sums::abs_diff(sums::hyper_mellin(table, t, CharTuple{}, low), sums::hyper_naive(t, CharTuple{}, low)) <=
            1e-9);
    }
  }
  SUBCASE("rank bound for disjoint tuples") {
    for (auto& f : fields_up_to(13, true)) {
      const sums::GaussTable table(f);
      for (const auto& chi : chars::enumerate_characters(f, true)) {
        for (const auto& eta : chars::enumerate_characters(f, true)) {
          const auto up = sums::theorem_upper(f);
          const auto low = sums::theorem_lower(chi, eta, sums::TheoremForm::printed);
          REQUIRE(sums::disjoint(up, low));
          for (gf::Element t = 1; t < f.q(); ++t) CHECK(sums::hyper_mellin(table, t, up, low).abs() <= 3 + 1e-6);
        }
      }
    }
  }
}

TEST_CASE("disjoint") {
  auto f = gf::FieldTable::build(7, 1);
  CHECK(sums::disjoint(CharTuple{MulCharacter(f, 0)}, CharTuple{MulCharacter(f, 1), MulCharacter(f, 2)}));
  CHECK_FALSE(sums::disjoint(CharTuple{MulCharacter(f, 2)}, CharTuple{MulCharacter(f, 1), MulCharacter(f, 2)}));
  CHECK(sums::disjoint(CharTuple{}, CharTuple{MulCharacter(f, 1)}));
}

TEST_CASE("g_direct") {
  SUBCASE("frozen GF(5) values") {
    // Computed by an independent brute-force script before the library existed.
    auto f = gf::FieldTable::build(5, 1);
    const cplx expect[3][3] = {{{0, -4}, {0, 0}, {0, 4}}, {{-2, 0}, {-6, 0}, {-2, 0}}, {{0, -4}, {0, 0}, {0, 4}}};
    for (std::uint32_t j = 1; j < 4; ++j) {
      for (std::uint32_t e = 1; e < 4; ++e) {
        for (auto form : {sums::GForm::product, sums::GForm::fraction, sums::GForm::ci}) {
          CHECK(close(sums::g_direct(MulCharacter(f, j), MulCharacter(f, e), form), expect[j - 1][e - 1], 1e-12));
        }
      }
    }
  }
  SUBCASE("GF(3) quadratic pair vanishes") {
    auto f = gf::FieldTable::build(3, 1);
    CHECK(close(sums::g_direct(MulCharacter(f, 1), MulCharacter(f, 1)), 0.0, 0.0));
  }
  SUBCASE("forms agree, symmetry and conjugation, q <= 13") {
    for (auto& f : fields_up_to(13)) {
      for (const auto& chi : chars::enumerate_characters(f, false)) {
        for (const auto& eta : chars::enumerate_characters(f, false)) {
          const auto g = sums::g_direct(chi, eta);
          CHECK(sums::abs_diff(g, sums::g_direct(chi, eta, sums::GForm::fraction)) <= 2 * g.err);
          CHECK(sums::abs_diff(g, sums::g_direct(chi, eta, sums::GForm::ci)) <= 2 * g.err);
          CHECK(sums::abs_diff(g, sums::g_direct(chi.conj(), eta)) <= 2 * g.err);
          CHECK(sums::abs_diff(sums::conj(g), sums::g_direct(chi.conj(), eta.conj())) <= 2 * g.err);
        }
      }
    }
  }
  SUBCASE("matches oracle on prime fields") {
    for (std::uint32_t p : {7u, 11u}) {
      auto f = gf::FieldTable::build(p, 1);
      const oracle::PrimeField o(p);
      for (std::uint32_t j = 0; j < p - 1; ++j) {
        for (std::uint32_t e = 0; e < p - 1; ++e) {
          CHECK(close(sums::g_direct(MulCharacter(f, j), MulCharacter(f, e)), o.g(j, e), 1e-10));
        }
      }
    }
  }
  SUBCASE("quadratic chi: real when chi(-1) = 1, purely imaginary when chi(-1) = -1") {
    // conj g(chi, eta) = g(chi, conj eta) = chi(-1) g(chi, eta) for quadratic chi,
    // so realness holds only for q = 1 mod 4.
    for (auto& f : fields_up_to(13, true)) {
      const MulCharacter quad(f, chars::quadratic_index(f));
      const bool minus_one_square = quad.at_minus_one() == chars::CharValue::one();
      for (const auto& eta : chars::enumerate_characters(f, true)) {
        const auto g = sums::g_direct(quad, eta);
        CHECK(sums::abs_diff(sums::conj(g), sums::g_direct(quad, eta.conj())) <= 2 * g.err);
        CHECK(std::abs(minus_one_square ? g.im : g.re) <= 1e-6 * f.q());
      }
    }
  }
}

TEST_CASE("the proof chain paths agree with g_direct") {
  for (auto& f : fields_up_to(13)) {
    CAPTURE(f.q());
    const sums::GaussTable table(f);
    const double tol = 1e-6 * f.q();
    for (const auto& chi : chars::enumerate_characters(f, true)) {
      for (const auto& eta : chars::enumerate_characters(f, true)) {
        const auto g = sums::g_direct(chi, eta);
        const auto jt = sums::g_jacobi_triple(chi, eta);
        const auto gf_ = sums::g_gauss_form(table, chi, eta);
        const auto rhs = sums::theorem_rhs(table, chi, eta, sums::TheoremForm::corrected);
        CHECK(sums::abs_diff(g, jt) <= tol);
        CHECK(sums::abs_diff(g, gf_) <= tol);
        CHECK(sums::abs_diff(g, rhs) <= tol);
        CHECK(sums::abs_diff(g, jt) <= g.err + jt.err);
        CHECK(sums::abs_diff(g, gf_) <= g.err + gf_.err);
        CHECK(rhs.abs() <= 3.0 * f.q() + tol);
      }
    }
  }
  auto f = gf::FieldTable::build(5, 1);
  const sums::GaussTable table(f);
  const MulCharacter one(f, 0), quad(f, 2);
  CHECK_THROWS_AS(sums::g_jacobi_triple(one, quad), std::invalid_argument);
  CHECK_THROWS_AS(sums::g_gauss_form(table, quad, one), std::invalid_argument);
  CHECK_THROWS_AS(sums::theorem_rhs(table, one, quad), std::invalid_argument);
  CHECK(close(sums::g_jacobi_triple(quad, quad), -6.0, 1e-12));
}

TEST_CASE("theorem_rhs forms") {
  SUBCASE("GF(3) quadratic pair: both forms vanish") {
    auto f = gf::FieldTable::build(3, 1);
    const sums::GaussTable table(f);
    const MulCharacter quad(f, 1);
    for (auto form : {sums::TheoremForm::printed, sums::TheoremForm::corrected}) {
      CHECK(close(sums::theorem_rhs(table, quad, quad, form), 0.0, 1e-12));
      CHECK(close(sums::theorem_rhs(table, quad, quad, form, sums::HyperPath::naive), 0.0, 1e-12));
    }
  }
  SUBCASE("the printed form disagrees with g on most pairs") {
    // GF(7): 22 of the 25 nontrivial pairs differ; the printed form agrees only
    // where g is real and invariant under eta -> conj eta with the right sign.
    auto f = gf::FieldTable::build(7, 1);
    const sums::GaussTable table(f);
    int mismatches = 0;
    for (const auto& chi : chars::enumerate_characters(f, true)) {
      for (const auto& eta : chars::enumerate_characters(f, true)) {
        const auto printed = sums::theorem_rhs(table, chi, eta, sums::TheoremForm::printed);
        if (sums::abs_diff(printed, sums::g_direct(chi, eta)) > 1e-6 * f.q()) ++mismatches;
        CHECK(printed.abs() <= 3.0 * f.q() + 1e-6);
      }
    }
    CHECK(mismatches == 22);
  }
  SUBCASE("naive and mellin hypergeometric paths give the same right-hand side") {
    for (std::uint32_t p : {5u, 7u}) {
      auto f = gf::FieldTable::build(p, 1);
      const sums::GaussTable table(f);
      for (const auto& chi : chars::enumerate_characters(f, true)) {
        for (const auto& eta : chars::enumerate_characters(f, true)) {
          for (auto form : {sums::TheoremForm::printed, sums::TheoremForm::corrected}) {
            CHECK(sums::abs_diff(sums::theorem_rhs(table, chi, eta, form),
                                 sums::theorem_rhs(table, chi, eta, form, sums::HyperPath::naive)) <= 1e-6 * p);
          }
        }
      }
    }
  }
}

TEST_CASE("s_sum") {
  SUBCASE("GF(5) against the double-loop oracle, as multisets over rho") {
    auto base = gf::make_field(5, 1);
    const auto ext = gf::build_quadratic_extension(base);
    const oracle::PrimeField o(5);
    const oracle::QuadraticField o2(o);
    REQUIRE(o2.delta == static_cast<std::int64_t>(ext.delta));
    for (std::uint32_t j = 1; j < 4; ++j) {
      for (std::uint32_t e = 1; e < 4; ++e) {
        std::vector<cplx> ours, theirs;
        for (std::uint32_t r = 1; r < 24; ++r) {
          ours.push_back(sums::s_sum(MulCharacter(*base, j), MulCharacter(*base, e), MulCharacter(*ext.ext, r), ext)
                             .value());
          theirs.push_back(o2.s_sum(j, e, r));
        }
        ours = oracle::sorted(ours);
        theirs = oracle::sorted(theirs);
        for (std::size_t i = 0; i < ours.size(); ++i) CHECK(std::abs(ours[i] - theirs[i]) <= 1e-9);
      }
    }
  }
  SUBCASE("GF(3): single surviving t and determinism") {
    auto base = gf::make_field(3, 1);
    const auto ext = gf::build_quadratic_extension(base);
    const MulCharacter quad(*base, 1);
    for (std::uint32_t r = 1; r < 8; ++r) {
      const MulCharacter rho(*ext.ext, r);
      const auto a = sums::s_sum(quad, quad, rho, ext);
      const auto b = sums::s_sum(quad, quad, rho, ext);
      CHECK(a.re == b.re);
      CHECK(a.im == b.im);
      // Only t = 2 contributes: S = sum_alpha rho(alpha + omega) chi(2) eta(alpha^2 - 2 delta) eta(-1).
      cplx expect = 0;
      for (gf::Element alpha = 0; alpha < 3; ++alpha) {
        const auto arg = base->sub(base->mul(alpha, alpha), base->mul(ext.delta, 2));
        expect += rho(ext.ext->add(ext.embed_element(alpha), ext.omega)).to_complex() * quad(2).to_complex() *
                  quad(arg).to_complex() * quad(base->minus_one()).conj().to_complex();
      }
      CHECK(close(a, expect, 1e-12));
    }
  }
  SUBCASE("wrong fields") {
    auto base = gf::make_field(5, 1);
    const auto ext = gf::build_quadratic_extension(base);
    const MulCharacter chi(*base, 1);
    CHECK_THROWS_AS(sums::s_sum(chi, chi, chi, ext), std::invalid_argument);
  }
}
