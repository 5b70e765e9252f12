#include "charsum/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace charsum::verify {

namespace {

using chars::MulCharacter;
using gf::Element;
using gf::FieldTable;
using sums::SumValue;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

bool has_order(std::uint64_t z, std::uint64_t L, std::uint64_t ell, const std::vector<std::uint64_t>& primes) {
  if (powmod(z, L, ell) != 1) return false;
  return std::all_of(primes.begin(), primes.end(),
                     [&](std::uint64_t d) { return powmod(z, L / d, ell) != 1; });
}

double theorem_tolerance(const FieldTable& f) { return 1e-6 * f.q(); }

// Everything a witness evaluation needs for one field, shared across pairs.
struct WitnessContext {
  std::vector<WitnessEvaluator> evaluators;
  std::vector<std::vector<std::uint64_t>> gauss;

  WitnessContext(const FieldTable& f, std::span<const WitnessPrime> witnesses) {
    for (const auto& w : witnesses) {
      evaluators.emplace_back(f, w);
      gauss.push_back(evaluators.back().gauss_residues());
    }
  }
};

// Residues per witness on both sides, and a flag per witness.
void run_witnesses(const WitnessContext& ctx, const std::vector<std::vector<std::uint64_t>>& gauss,
                   std::uint32_t j, std::uint32_t e, Report& r) {
  for (std::size_t i = 0; i < ctx.evaluators.size(); ++i) {
    const auto& ev = ctx.evaluators[i];
    const std::uint64_t l = ev.lhs(j, e);
    const std::uint64_t rr = ev.rhs(j, e, gauss[i]);
    r.lhs.witness.push_back({ev.witness().ell, l});
    r.rhs.witness.push_back({ev.witness().ell, rr});
    r.witness_pass.push_back(l == rr);
  }
}

Report theorem_report(const sums::GaussTable& table, const MulCharacter& chi, const MulCharacter& eta,
                      const TheoremOptions& options, const WitnessContext* ctx) {
  const FieldTable& f = chi.field();
  Report r;
  r.field = f.spec();
  r.identity = identity_name(options.form);
  r.chi = chi.index();
  r.eta = eta.index();
  r.lhs = sums::g_direct(chi, eta);
  r.rhs = sums::theorem_rhs(table, chi, eta, options.form, options.path);
  r.tolerance = theorem_tolerance(f);
  if (ctx) run_witnesses(*ctx, ctx->gauss, chi.index(), eta.index(), r);
  r.finalize();
  return r;
}

}  // namespace

std::vector<WitnessPrime> find_witness_primes(std::uint64_t L, std::size_t count) {
  if (L == 0 || count == 0) throw std::invalid_argument("L and count must be positive");
  const auto primes = gf::prime_divisors(L);
  const std::uint64_t floor = std::max<std::uint64_t>(L, 50);
  std::vector<WitnessPrime> out;
  for (std::uint64_t ell = L + 1; out.size() < count; ell += L) {
    if (ell > kWitnessSearchCap) throw std::runtime_error("witness prime search cap exhausted");
    if (ell <= floor || !gf::is_prime(ell)) continue;
    for (std::uint64_t z = 1; z < ell; ++z) {
      if (has_order(z, L, ell, primes)) {
        out.push_back({ell, L, z});
        break;
      }
    }
  }
  return out;
}

std::uint64_t witness_modulus(const gf::FieldTable& field) {
  return std::lcm<std::uint64_t>(field.p(), field.order());
}

bool valid_witness(const WitnessPrime& w) {
  if (w.L == 0 || w.ell < 2 || !gf::is_prime(w.ell) || w.ell % w.L != 1 % w.L) return false;
  return has_order(w.zeta % w.ell, w.L, w.ell, gf::prime_divisors(w.L));
}

WitnessEvaluator::WitnessEvaluator(const gf::FieldTable& field, const WitnessPrime& w) : field_(&field), w_(w) {
  if (w.L != witness_modulus(field)) throw std::invalid_argument("witness prime built for a different L");
  if (!valid_witness(w)) throw std::invalid_argument("invalid witness prime");
  const std::uint64_t zm = powmod(w.zeta, field.p(), w.ell);
  const std::uint64_t za = powmod(w.zeta, field.order(), w.ell);
  mul_roots_.resize(field.order());
  add_roots_.resize(field.p());
  std::uint64_t z = 1;
  for (auto& v : mul_roots_) {
    v = z;
    z = mulmod(z, zm, w.ell);
  }
  z = 1;
  for (auto& v : add_roots_) {
    v = z;
    z = mulmod(z, za, w.ell);
  }
}

std::uint64_t WitnessEvaluator::mul(std::uint64_t a, std::uint64_t b) const { return mulmod(a, b, w_.ell); }

std::uint64_t WitnessEvaluator::sign(std::uint32_t j) const {
  return mul_root(static_cast<std::uint64_t>(j) * field_->character_log(field_->minus_one()));
}

std::vector<std::uint64_t> WitnessEvaluator::gauss_residues() const {
  const FieldTable& f = *field_;
  const std::uint32_t ord = f.order();
  std::vector<std::uint64_t> out(ord, 0);
  for (std::uint32_t j = 0; j < ord; ++j) {
    std::uint64_t s = 0;
    for (Element a = 1; a < f.q(); ++a) {
      s = add(s, mul(mul_root(static_cast<std::uint64_t>(j) * f.character_log(a)), add_roots_[f.trace(a)]));
    }
    out[j] = s;
  }
  return out;
}

std::uint64_t WitnessEvaluator::lhs(std::uint32_t chi, std::uint32_t eta) const {
  const FieldTable& f = *field_;
  const std::uint64_t ord = f.order();
  const Element m1 = f.minus_one();
  // Exponent histogram of chi(u(v+1)/(v(u+1))) eta(uv-1), then one pass in GF(ell).
  std::vector<std::int64_t> ratio(f.q(), -1);
  for (Element u = 1; u < f.q(); ++u) {
    const Element u1 = f.plus_one(u);
    if (u1 == 0) continue;
    ratio[u] = static_cast<std::int64_t>((f.character_log(u) % ord + ord - f.character_log(u1) % ord) % ord);
  }
  std::vector<std::uint64_t> hist(ord, 0);
  for (Element u = 0; u < f.q(); ++u) {
    if (ratio[u] < 0) continue;
    for (Element v = 0; v < f.q(); ++v) {
      if (ratio[v] < 0) continue;
      const Element w = f.add(f.mul(u, v), m1);
      if (w == 0) continue;
      const std::uint64_t d = static_cast<std::uint64_t>(ord + ratio[u] - ratio[v]) % ord;
      ++hist[(d * chi + static_cast<std::uint64_t>(f.character_log(w)) * eta) % ord];
    }
  }
  std::uint64_t g = 0;
  for (std::uint64_t e = 0; e < ord; ++e) g = add(g, mul(hist[e] % w_.ell, mul_roots_[e]));
  const std::uint64_t q = f.q() % w_.ell;
  return mul(g, mul(mul(q, mul(q, q)), ord % w_.ell));
}

std::uint64_t WitnessEvaluator::rhs(std::uint32_t chi, std::uint32_t eta, std::span<const std::uint64_t> gauss) const {
  const std::uint32_t ord = field_->order();
  if (gauss.size() != ord) throw std::invalid_argument("Gauss residue table has the wrong size");
  const std::uint32_t chib = (ord - chi) % ord;
  auto conj_tau = [&](std::uint32_t k) { return mul(sign(k), gauss[(ord - k) % ord]); };
  std::uint64_t total = 0;
  for (std::uint32_t r = 0; r < ord; ++r) {
    const std::uint64_t t = gauss[r];
    const std::uint64_t cube = mul(t, mul(t, t));
    const std::uint64_t lower =
        mul(conj_tau((r + eta) % ord), mul(conj_tau((r + chib) % ord), conj_tau((r + chi) % ord)));
    total = add(total, mul(cube, lower));
  }
  const std::uint64_t pre = mul(sign(eta), mul(gauss[eta], mul(gauss[chib], gauss[chi])));
  return mul(pre, total);
}

void Report::finalize() {
  abs_diff = sums::abs_diff(lhs, rhs);
  pass = abs_diff <= tolerance && std::all_of(witness_pass.begin(), witness_pass.end(), [](bool b) { return b; });
}

Report witness_check(const sums::GaussTable& table, const chars::MulCharacter& chi,
                     const chars::MulCharacter& eta, std::span<const WitnessPrime> witnesses,
                     const std::vector<std::vector<std::uint64_t>>* gauss_override) {
  const FieldTable& f = chi.field();
  if (&eta.field() != &f || &table.field() != &f) throw std::invalid_argument("arguments over different fields");
  if (chi.is_trivial() || eta.is_trivial()) throw std::invalid_argument("witness_check requires nontrivial chi and eta");
  const WitnessContext ctx(f, witnesses);
  if (gauss_override && gauss_override->size() != witnesses.size()) {
    throw std::invalid_argument("one Gauss residue table per witness expected");
  }
  Report r;
  r.field = f.spec();
  r.identity = "gauss-chain";
  r.chi = chi.index();
  r.eta = eta.index();
  r.lhs = sums::g_direct(chi, eta);
  r.rhs = sums::g_gauss_form(table, chi, eta);
  r.tolerance = theorem_tolerance(f);
  run_witnesses(ctx, gauss_override ? *gauss_override : ctx.gauss, chi.index(), eta.index(), r);
  r.finalize();
  return r;
}

std::uint64_t witness_height_bound(const gf::FieldTable& field) {
  const std::uint64_t q = field.q();
  const long double b = std::pow(static_cast<long double>(q), 5) * (q - 1);
  if (b > 9.2e18L) throw std::overflow_error("height bound does not fit 64 bits");
  return q * q * q * q * q * (q - 1);
}

Certificate certify_pair(const gf::FieldTable& field, std::uint32_t chi, std::uint32_t eta) {
  const std::uint32_t ord = field.order();
  if (chi == 0 || eta == 0 || chi >= ord || eta >= ord) throw std::invalid_argument("nontrivial indices expected");
  const std::uint64_t L = witness_modulus(field);
  Certificate cert;
  cert.height_bound = static_cast<long double>(witness_height_bound(field));
  // Take primes in increasing order until their product exceeds 2B.
  std::vector<WitnessPrime> primes;
  long double product = 1;
  for (std::size_t n = 1; product <= 2 * cert.height_bound; ++n) {
    primes = find_witness_primes(L, n);
    product *= static_cast<long double>(primes.back().ell);
  }
  cert.certified = true;
  for (const auto& w : primes) {
    cert.primes.push_back(w.ell);
    for (std::uint64_t k = 1; k < L; ++k) {
      if (std::gcd(k, L) != 1) continue;
      const WitnessEvaluator ev(field, WitnessPrime{w.ell, L, powmod(w.zeta, k, w.ell)});
      const auto gauss = ev.gauss_residues();
      ++cert.embeddings_checked;
      if (ev.lhs(chi, eta) != ev.rhs(chi, eta, gauss)) cert.certified = false;
    }
  }
  return cert;
}

const char* identity_name(sums::TheoremForm form) {
  return form == sums::TheoremForm::printed ? "closed-form-printed" : "closed-form-corrected";
}

Report check_theorem(const sums::GaussTable& table, const chars::MulCharacter& chi,
                     const chars::MulCharacter& eta, const TheoremOptions& options) {
  if (options.witnesses == 0) return theorem_report(table, chi, eta, options, nullptr);
  const auto primes = find_witness_primes(witness_modulus(chi.field()), options.witnesses);
  const WitnessContext ctx(chi.field(), primes);
  return theorem_report(table, chi, eta, options, &ctx);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

unsigned default_threads() {
  if (const char* env = std::getenv("CHARSUM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

JacobiGaussResult check_jacobi_gauss(const sums::GaussTable& gauss, const sums::JacobiTable& jacobi) {
  const FieldTable& f = gauss.field();
  if (&jacobi.field() != &f) throw std::invalid_argument("tables over different fields");
  const std::uint32_t ord = f.order();
  const double q = f.q();
  JacobiGaussResult out;
  const SumValue& j11 = jacobi(0, 0);
  out.trivial_exact = j11.re == q - 2 && j11.im == 0.0;
  for (std::uint32_t a = 0; a < ord; ++a) {
    for (std::uint32_t b = 0; b < ord; ++b) {
      if (a == 0 && b == 0) continue;
      const SumValue via = (1.0 / q) * (gauss[a] * gauss[b] * sums::conj(gauss[(a + b) % ord]));
      const double d = sums::abs_diff(jacobi(a, b), via);
      ++out.pairs;
      out.max_diff = std::max(out.max_diff, d);
      if (d > 1e-8 * q) ++out.failures;
    }
  }
  return out;
}

void ScanReport::finalize() {
  auto& a = aggregates;
  const double q = field.q;
  const double tol = 1e-6 * q;
  a.pairs = rows.size();
  a.failures = a.witness_failures = a.printed_form_mismatches = a.realness_violations = 0;
  a.max_g_over_q = a.max_h = a.max_abs_diff = a.max_path_diff = a.max_im_g_quadratic = 0.0;
  for (const auto& row : rows) {
    const auto& t = row.theorem;
    if (!row.pass) ++a.failures;
    if (!std::all_of(t.witness_pass.begin(), t.witness_pass.end(), [](bool b) { return b; })) ++a.witness_failures;
    if (row.printed_diff > tol) ++a.printed_form_mismatches;
    a.max_g_over_q = std::max(a.max_g_over_q, t.lhs.abs() / q);
    a.max_h = std::max(a.max_h, row.max_h);
    a.max_abs_diff = std::max(a.max_abs_diff, t.abs_diff);
    a.max_path_diff = std::max(a.max_path_diff, row.path_diff);
    if (row.chi_quadratic) {
      a.max_im_g_quadratic = std::max(a.max_im_g_quadratic, std::abs(t.lhs.im));
      if (std::abs(t.lhs.im) > tol) ++a.realness_violations;
    }
  }
  pass = a.failures == 0 && a.jacobi_gauss_failures == 0;
}

ScanReport scan_field(const gf::FieldTable& field, const ScanOptions& options) {
  if (field.q() < 3) throw std::invalid_argument("scans need q >= 3");
  const std::uint32_t ord = field.order();
  const double q = field.q();
  const double tol = 1e-6 * q;

  ScanReport out;
  out.field = field.spec();
  out.options = options;
  out.report_only = options.report_only || !field.odd();

  const sums::GaussTable gauss(field);
  std::optional<sums::JacobiTable> jacobi;
  if (options.check_paths || options.check_jacobi_gauss) jacobi.emplace(field);
  std::optional<WitnessContext> ctx;
  std::vector<WitnessPrime> primes;
  if (options.witnesses > 0) {
    primes = find_witness_primes(witness_modulus(field), options.witnesses);
    ctx.emplace(field, primes);
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint32_t j = 1; j < ord; ++j) {
    if (options.quadratic_only && !(field.odd() && j == ord / 2)) continue;
    for (std::uint32_t e = 1; e < ord; ++e) pairs.emplace_back(j, e);
  }
  out.rows.resize(pairs.size());

  const TheoremOptions topts{options.form, sums::HyperPath::mellin, options.witnesses};
  const sums::CharTuple upper = sums::theorem_upper(field);
  parallel_for(pairs.size(), options.threads, [&](std::size_t i) {
    const MulCharacter chi(field, pairs[i].first), eta(field, pairs[i].second);
    ScanRow row;
    row.theorem = theorem_report(gauss, chi, eta, topts, ctx ? &*ctx : nullptr);
    const SumValue& g = row.theorem.lhs;
    row.printed_diff = options.form == sums::TheoremForm::printed
                           ? row.theorem.abs_diff
                           : sums::abs_diff(g, sums::theorem_rhs(gauss, chi, eta, sums::TheoremForm::printed));
    if (options.check_paths) {
      const SumValue paths[] = {g, sums::g_jacobi_triple(*jacobi, chi, eta), sums::g_gauss_form(gauss, chi, eta),
                                row.theorem.rhs};
      for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = a + 1; b < 4; ++b) row.path_diff = std::max(row.path_diff, sums::abs_diff(paths[a], paths[b]));
      }
      row.paths_ok = row.path_diff <= tol;
    }
    if (options.check_hyper) {
      const auto profile = sums::hyper_mellin_profile(gauss, upper, sums::theorem_lower(chi, eta, options.form));
      for (Element t = 1; t < field.q(); ++t) row.max_h = std::max(row.max_h, profile[t].abs());
      row.hyper_ok = row.max_h <= 3.0 + 1e-6;
    }
    row.bound_ok = g.abs() <= 3.0 * q + tol;
    row.chi_quadratic = field.odd() && chi.is_quadratic();
    if (row.chi_quadratic) {
      const bool even = chi.at_minus_one() == chars::CharValue::one();
      row.parity_ok = (even ? std::abs(g.im) : std::abs(g.re)) <= tol;
    }
    row.pass = row.theorem.pass && row.paths_ok && row.hyper_ok && row.bound_ok && row.parity_ok;
    out.rows[i] = std::move(row);
  });

  if (options.check_jacobi_gauss) {
    const auto jg = check_jacobi_gauss(gauss, *jacobi);
    out.aggregates.jacobi_gauss_pairs = jg.pairs + 1;
    out.aggregates.jacobi_gauss_failures = jg.failures + (jg.trivial_exact ? 0 : 1);
    out.aggregates.max_jacobi_gauss_diff = jg.max_diff;
  }
  out.finalize();
  return out;
}

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

nlohmann::json to_json(const sums::SumValue& v) {
  nlohmann::json j{{"re", v.re}, {"im", v.im}, {"err", v.err}};
  if (!v.witness.empty()) {
    auto& w = j["witness"] = nlohmann::json::array();
    for (const auto& r : v.witness) w.push_back({{"ell", r.ell}, {"residue", r.residue}});
  }
  return j;
}

namespace {

nlohmann::json spec_json(const gf::FieldSpec& s) {
  return {{"p", s.p}, {"n", s.n}, {"q", s.q}, {"modulus", s.modulus}};
}

const char* form_name(sums::TheoremForm f) { return f == sums::TheoremForm::printed ? "printed" : "corrected"; }

}  // namespace

nlohmann::json to_json(const Report& r) {
  nlohmann::json j{{"field", spec_json(r.field)},
                   {"identity", r.identity},
                   {"chi", r.chi},
                   {"eta", r.eta},
                   {"lhs", to_json(r.lhs)},
                   {"rhs", to_json(r.rhs)},
                   {"abs_diff", r.abs_diff},
                   {"tolerance", r.tolerance},
                   {"pass", r.pass}};
  if (!r.witness_pass.empty()) {
    auto& w = j["witness_pass"] = nlohmann::json::array();
    for (bool b : r.witness_pass) w.push_back(b);
  }
  return j;
}

nlohmann::json to_json(const WitnessPrime& w) { return {{"ell", w.ell}, {"L", w.L}, {"zeta", w.zeta}}; }

nlohmann::json to_json(const ScanReport& r) {
  const auto& a = r.aggregates;
  const auto& o = r.options;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    auto j = to_json(row.theorem);
    j["printed_diff"] = row.printed_diff;
    j["path_diff"] = row.path_diff;
    j["max_H"] = row.max_h;
    j["chi_quadratic"] = row.chi_quadratic;
    j["checks"] = {{"theorem", row.theorem.pass},
                   {"paths", row.paths_ok},
                   {"hyper_bound", row.hyper_ok},
                   {"g_bound", row.bound_ok},
                   {"parity", row.parity_ok}};
    j["row_pass"] = row.pass;
    rows.push_back(std::move(j));
  }
  return {{"field", spec_json(r.field)},
          {"options",
           {{"form", form_name(o.form)},
            {"quadratic_only", o.quadratic_only},
            {"witnesses", o.witnesses},
            {"check_paths", o.check_paths},
            {"check_hyper", o.check_hyper},
            {"check_jacobi_gauss", o.check_jacobi_gauss}}},
          {"report_only", r.report_only},
          {"pass", r.pass},
          {"aggregates",
           {{"pairs", a.pairs},
            {"failures", a.failures},
            {"witness_failures", a.witness_failures},
            {"printed_form_mismatches", a.printed_form_mismatches},
            {"realness_violations", a.realness_violations},
            {"max_g_over_q", a.max_g_over_q},
            {"max_H", a.max_h},
            {"max_abs_diff", a.max_abs_diff},
            {"max_path_diff", a.max_path_diff},
            {"max_im_g_quadratic", a.max_im_g_quadratic},
            {"jacobi_gauss_pairs", a.jacobi_gauss_pairs},
            {"jacobi_gauss_failures", a.jacobi_gauss_failures},
            {"max_jacobi_gauss_diff", a.max_jacobi_gauss_diff}}},
          {"rows", std::move(rows)}};
}

std::string csv_header() {
  return "p,n,q,chi_j,eta_j,g_re,g_im,rhs_re,rhs_im,abs_diff,max_H,witness_pass,pass\n";
}

std::string to_csv(const ScanReport& r) {
  std::ostringstream os;
  os << csv_header();
  for (const auto& row : r.rows) {
    const auto& t = row.theorem;
    std::string wp = "na";
    if (!t.witness_pass.empty()) {
      wp = std::all_of(t.witness_pass.begin(), t.witness_pass.end(), [](bool b) { return b; }) ? "true" : "false";
    }
    os << r.field.p << ',' << r.field.n << ',' << r.field.q << ',' << t.chi << ',' << t.eta << ','
       << format_number(t.lhs.re) << ',' << format_number(t.lhs.im) << ',' << format_number(t.rhs.re) << ','
       << format_number(t.rhs.im) << ',' << format_number(t.abs_diff) << ',' << format_number(row.max_h) << ','
       << wp << ',' << (row.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace charsum::verify
