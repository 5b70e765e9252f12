#include "charsum/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "charsum/verify.hpp"

namespace charsum::cli {

namespace {

using chars::MulCharacter;
using nlohmann::json;
using sums::SumValue;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::uint32_t p = 0;
  std::uint32_t n = 1;
  std::vector<std::uint32_t> modulus;
  std::optional<std::uint64_t> chi, eta, rho;
  std::uint64_t t = 1;
  std::uint64_t psi = 1;
  std::vector<std::uint64_t> chis, etas;
  std::string format = "text";
  std::string output;
  std::size_t witnesses = 2;
  std::size_t count = 2;
  unsigned threads = 1;
  bool report_only = false;
  bool all_pairs = false;
  bool quadratic_only = false;
  bool certify = false;
  bool no_paths = false;
  bool no_hyper = false;
  bool no_jacobi_gauss = false;
  std::string form = "corrected";
  std::string gform = "product";
  std::string path = "mellin";
};

// What a subcommand produced: the text to print and whether it verified.
struct Outcome {
  std::string text;
  bool ok = true;
};

gf::FieldTable make_table(const Config& c) {
  std::optional<std::vector<std::uint32_t>> mod;
  if (!c.modulus.empty()) mod = c.modulus;
  try {
    return gf::FieldTable::build(c.p, c.n, mod);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::uint32_t char_index(const gf::FieldTable& f, const std::optional<std::uint64_t>& v, const char* name) {
  if (!v) throw UsageError(std::string("--") + name + " is required");
  if (*v >= f.order()) {
    throw UsageError(std::string("--") + name + " must be below q - 1 = " + std::to_string(f.order()));
  }
  return static_cast<std::uint32_t>(*v);
}

sums::TheoremForm theorem_form(const Config& c) {
  return c.form == "printed" ? sums::TheoremForm::printed : sums::TheoremForm::corrected;
}

json spec_json(const gf::FieldTable& f) {
  return {{"p", f.p()}, {"n", f.n()}, {"q", f.q()}, {"modulus", f.spec().modulus}};
}

std::string join(const std::vector<std::uint32_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

std::string value_text(const SumValue& v) {
  const bool neg = std::signbit(v.im) && v.im != 0.0;
  return verify::format_number(v.re) + (neg ? " - " : " + ") + verify::format_number(std::abs(v.im)) +
         "i  (err <= " + verify::format_number(v.err) + ")";
}

// A list of named values in the requested format.
std::string emit_values(const Config& c, const json& head, const std::vector<std::pair<std::string, SumValue>>& vals) {
  if (c.format == "json") {
    json j = head;
    for (const auto& [name, v] : vals) j[name] = verify::to_json(v);
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  if (c.format == "csv") {
    os << "name,re,im,err\n";
    for (const auto& [name, v] : vals) {
      os << name << ',' << verify::format_number(v.re) << ',' << verify::format_number(v.im) << ','
         << verify::format_number(v.err) << '\n';
    }
    return os.str();
  }
  for (const auto& [name, v] : vals) os << name << " = " << value_text(v) << '\n';
  return os.str();
}

Outcome field_info(const Config& c) {
  const auto f = make_table(c);
  json summary = spec_json(f);
  summary["gen"] = f.gen();
  if (f.odd()) summary["quadratic_index"] = chars::quadratic_index(f);
  if (c.format == "json") {
    summary["table"] = gf::dump_json(f);
    return {summary.dump(2) + "\n"};
  }
  std::ostringstream os;
  if (c.format == "csv") {
    os << "p,n,q,modulus,gen\n" << f.p() << ',' << f.n() << ',' << f.q() << ',' << join(f.spec().modulus) << ','
       << f.gen() << '\n';
    return {os.str()};
  }
  os << "GF(" << f.p() << "^" << f.n() << "), q = " << f.q() << "\n"
     << "modulus (constant term first): " << join(f.spec().modulus) << "\n"
     << "generator code: " << f.gen() << "\n"
     << "characters: index 0 is trivial";
  if (f.odd()) os << ", index " << chars::quadratic_index(f) << " is quadratic";
  os << "\n";
  return {os.str()};
}

Outcome gauss(const Config& c) {
  const auto f = make_table(c);
  const MulCharacter chi(f, char_index(f, c.chi, "chi"));
  if (c.psi == 0 || c.psi >= f.q()) throw UsageError("--psi must be a nonzero element code below q");
  const chars::AddCharacter psi(f, static_cast<gf::Element>(c.psi));
  const json head{{"field", spec_json(f)}, {"chi", chi.index()}, {"psi", c.psi}};
  return {emit_values(c, head, {{"tau", sums::gauss_sum(chi, psi)}})};
}

Outcome jacobi(const Config& c) {
  const auto f = make_table(c);
  const MulCharacter a(f, char_index(f, c.chi, "chi")), b(f, char_index(f, c.eta, "eta"));
  std::vector<std::pair<std::string, SumValue>> vals{{"J", sums::jacobi_sum(a, b)}};
  if (!(a.is_trivial() && b.is_trivial())) {
    vals.emplace_back("J_via_gauss", sums::jacobi_via_gauss(a, b, chars::AddCharacter::canonical(f)));
  }
  const json head{{"field", spec_json(f)}, {"chi", a.index()}, {"eta", b.index()}};
  return {emit_values(c, head, vals)};
}

Outcome hyper(const Config& c) {
  const auto f = make_table(c);
  if (c.t == 0 || c.t >= f.q()) throw UsageError("--t must be a nonzero element code below q");
  if (c.chis.empty() && c.etas.empty()) throw UsageError("--chis and --etas cannot both be empty");
  auto tuple = [&](const std::vector<std::uint64_t>& idx, const char* name) {
    std::vector<MulCharacter> v;
    for (auto i : idx) v.emplace_back(f, char_index(f, i, name));
    return sums::CharTuple(std::move(v));
  };
  const auto chis = tuple(c.chis, "chis"), etas = tuple(c.etas, "etas");
  const auto t = static_cast<gf::Element>(c.t);
  std::vector<std::pair<std::string, SumValue>> vals;
  if (c.path != "naive") {
    const sums::GaussTable table(f);
    vals.emplace_back("H_mellin", sums::hyper_mellin(table, t, chis, etas));
  }
  if (c.path != "mellin") vals.emplace_back("H_naive", sums::hyper_naive(t, chis, etas));
  const json head{{"field", spec_json(f)}, {"t", c.t}, {"chis", c.chis}, {"etas", c.etas}};
  return {emit_values(c, head, vals)};
}

Outcome gsum(const Config& c) {
  const auto f = make_table(c);
  const MulCharacter chi(f, char_index(f, c.chi, "chi")), eta(f, char_index(f, c.eta, "eta"));
  const auto form = c.gform == "fraction" ? sums::GForm::fraction
                    : c.gform == "ci"     ? sums::GForm::ci
                                          : sums::GForm::product;
  const json head{{"field", spec_json(f)}, {"chi", chi.index()}, {"eta", eta.index()}, {"form", c.gform}};
  return {emit_values(c, head, {{"g", sums::g_direct(chi, eta, form)}})};
}

Outcome ssum(const Config& c) {
  const auto base = std::make_shared<const gf::FieldTable>(make_table(c));
  if (!base->odd()) throw UsageError("ssum needs odd q");
  const auto ext = gf::build_quadratic_extension(base);
  const MulCharacter chi(*base, char_index(*base, c.chi, "chi")), eta(*base, char_index(*base, c.eta, "eta"));
  const MulCharacter rho(*ext.ext, char_index(*ext.ext, c.rho, "rho"));
  const json head{{"field", spec_json(*base)},
                  {"chi", chi.index()},
                  {"eta", eta.index()},
                  {"rho", rho.index()},
                  {"omega", ext.omega},
                  {"delta", ext.delta}};
  return {emit_values(c, head, {{"S", sums::s_sum(chi, eta, rho, ext)}})};
}

std::string reports_text(const std::vector<verify::Report>& reports) {
  std::ostringstream os;
  for (const auto& r : reports) {
    os << r.identity << " chi=" << r.chi << " eta=" << r.eta << " lhs=" << value_text(r.lhs)
       << " rhs=" << value_text(r.rhs) << " diff=" << verify::format_number(r.abs_diff);
    if (!r.witness_pass.empty()) {
      os << " witnesses=";
      for (std::size_t i = 0; i < r.witness_pass.size(); ++i) {
        os << (i ? "," : "") << r.lhs.witness[i].ell << (r.witness_pass[i] ? ":ok" : ":FAIL");
      }
    }
    os << (r.pass ? " PASS" : " FAIL") << '\n';
  }
  return os.str();
}

std::string reports_csv(const std::vector<verify::Report>& reports) {
  std::ostringstream os;
  os << "p,n,q,identity,chi_j,eta_j,lhs_re,lhs_im,rhs_re,rhs_im,abs_diff,tolerance,witness_pass,pass\n";
  for (const auto& r : reports) {
    std::string wp = "na";
    if (!r.witness_pass.empty()) {
      wp = std::all_of(r.witness_pass.begin(), r.witness_pass.end(), [](bool b) { return b; }) ? "true" : "false";
    }
    os << r.field.p << ',' << r.field.n << ',' << r.field.q << ',' << r.identity << ',' << r.chi << ',' << r.eta
       << ',' << verify::format_number(r.lhs.re) << ',' << verify::format_number(r.lhs.im) << ','
       << verify::format_number(r.rhs.re) << ',' << verify::format_number(r.rhs.im) << ','
       << verify::format_number(r.abs_diff) << ',' << verify::format_number(r.tolerance) << ',' << wp << ','
       << (r.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> selected_pairs(const Config& c, const gf::FieldTable& f) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  if (c.all_pairs) {
    for (std::uint32_t j = 1; j < f.order(); ++j) {
      for (std::uint32_t e = 1; e < f.order(); ++e) pairs.emplace_back(j, e);
    }
  } else {
    pairs.emplace_back(char_index(f, c.chi, "chi"), char_index(f, c.eta, "eta"));
  }
  for (const auto& [j, e] : pairs) {
    if (j == 0 || e == 0) throw UsageError("chi and eta must be nontrivial (index 0 is the trivial character)");
  }
  return pairs;
}

std::string emit_reports(const Config& c, const gf::FieldTable& f, const std::vector<verify::Report>& reports,
                         json extra) {
  if (c.format == "csv") return reports_csv(reports);
  if (c.format == "text") return reports_text(reports);
  json j = std::move(extra);
  j["field"] = spec_json(f);
  j["reports"] = json::array();
  for (const auto& r : reports) j["reports"].push_back(verify::to_json(r));
  return j.dump(2) + "\n";
}

bool all_pass(const std::vector<verify::Report>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const verify::Report& r) { return r.pass; });
}

Outcome verify_theorem(const Config& c) {
  const auto f = make_table(c);
  const auto pairs = selected_pairs(c, f);
  const sums::GaussTable table(f);
  std::vector<verify::Report> reports(pairs.size());
  const verify::TheoremOptions opts{theorem_form(c), sums::HyperPath::mellin, c.witnesses};
  verify::parallel_for(pairs.size(), c.threads, [&](std::size_t i) {
    reports[i] = verify::check_theorem(table, MulCharacter(f, pairs[i].first), MulCharacter(f, pairs[i].second), opts);
  });
  json extra = json::object();
  bool ok = all_pass(reports);
  if (c.certify) {
    json certs = json::array();
    for (const auto& [j, e] : pairs) {
      const auto cert = verify::certify_pair(f, j, e);
      ok = ok && cert.certified;
      certs.push_back({{"chi", j},
                       {"eta", e},
                       {"primes", cert.primes},
                       {"embeddings_checked", cert.embeddings_checked},
                       {"height_bound", static_cast<double>(cert.height_bound)},
                       {"certified", cert.certified}});
    }
    extra["certificates"] = std::move(certs);
  }
  auto text = emit_reports(c, f, reports, extra);
  if (c.certify && c.format == "text") {
    for (const auto& cert : extra["certificates"]) {
      text += "certificate chi=" + cert["chi"].dump() + " eta=" + cert["eta"].dump() +
              " primes=" + cert["primes"].dump() + " embeddings=" + cert["embeddings_checked"].dump() +
              (cert["certified"].get<bool>() ? " CERTIFIED\n" : " NOT CERTIFIED\n");
    }
  }
  // characteristic 2 is reported, never asserted
  return {text, ok || !f.odd()};
}

Outcome witness(const Config& c) {
  const auto f = make_table(c);
  const auto L = verify::witness_modulus(f);
  const auto primes = verify::find_witness_primes(L, c.count);
  if (!c.chi && !c.eta) {
    std::ostringstream os;
    if (c.format == "json") {
      json j{{"field", spec_json(f)}, {"L", L}, {"witnesses", json::array()}};
      for (const auto& w : primes) j["witnesses"].push_back(verify::to_json(w));
      return {j.dump(2) + "\n"};
    }
    if (c.format == "csv") os << "ell,L,zeta\n";
    for (const auto& w : primes) {
      if (c.format == "csv") {
        os << w.ell << ',' << w.L << ',' << w.zeta << '\n';
      } else {
        os << "ell = " << w.ell << "  L = " << w.L << "  zeta = " << w.zeta << '\n';
      }
    }
    return {os.str()};
  }
  const auto pairs = selected_pairs(c, f);
  const sums::GaussTable table(f);
  const auto [j, e] = pairs.front();
  const auto r = verify::witness_check(table, MulCharacter(f, j), MulCharacter(f, e), primes);
  return {emit_reports(c, f, {r}, json::object()), r.pass};
}

std::string scan_text(const verify::ScanReport& r) {
  const auto& a = r.aggregates;
  std::ostringstream os;
  os << "GF(" << r.field.p << "^" << r.field.n << ") q=" << r.field.q << "  pairs=" << a.pairs
     << "  failures=" << a.failures << (r.report_only ? "  (report only)" : "") << '\n'
     << "max |g|/q            " << verify::format_number(a.max_g_over_q) << '\n'
     << "max_t |H(t)|         " << verify::format_number(a.max_h) << '\n'
     << "max |g - rhs|        " << verify::format_number(a.max_abs_diff) << '\n'
     << "max path spread      " << verify::format_number(a.max_path_diff) << '\n'
     << "max |Im g| (quad)    " << verify::format_number(a.max_im_g_quadratic) << '\n'
     << "realness violations  " << a.realness_violations << '\n'
     << "printed-form misses  " << a.printed_form_mismatches << '\n'
     << "witness failures     " << a.witness_failures << '\n'
     << "jacobi/gauss pairs   " << a.jacobi_gauss_pairs << " failures " << a.jacobi_gauss_failures << " max diff "
     << verify::format_number(a.max_jacobi_gauss_diff) << '\n';
  for (const auto& row : r.rows) {
    if (row.pass) continue;
    os << "FAIL chi=" << row.theorem.chi << " eta=" << row.theorem.eta << " theorem=" << row.theorem.pass
       << " paths=" << row.paths_ok << " H=" << row.hyper_ok << " bound=" << row.bound_ok
       << " parity=" << row.parity_ok << '\n';
  }
  os << (r.pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

Outcome scan(const Config& c) {
  const auto f = make_table(c);
  if (f.q() < 3) throw UsageError("scan needs q >= 3");
  verify::ScanOptions o;
  o.threads = c.threads;
  o.quadratic_only = c.quadratic_only;
  o.witnesses = c.witnesses;
  o.form = theorem_form(c);
  o.check_paths = !c.no_paths;
  o.check_hyper = !c.no_hyper;
  o.check_jacobi_gauss = !c.no_jacobi_gauss;
  o.report_only = c.report_only;
  const auto r = verify::scan_field(f, o);
  std::string text = c.format == "json" ? verify::to_json(r).dump(2) + "\n"
                     : c.format == "csv" ? verify::to_csv(r)
                                         : scan_text(r);
  return {text, r.pass || r.report_only};
}

void add_field_options(CLI::App* sub, Config& c) {
  sub->add_option("--p", c.p, "characteristic (prime)")->required();
  sub->add_option("--n", c.n, "extension degree")->capture_default_str();
  sub->add_option("--modulus", c.modulus, "monic irreducible, constant term first (n+1 coefficients)")
      ->delimiter(',');
  sub->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  sub->add_option("--output", c.output, "write the result to this file instead of stdout");
}

void add_pair_options(CLI::App* sub, Config& c, bool required) {
  auto* chi = sub->add_option("--chi", c.chi, "index j of chi_j in [0, q-1); 0 is trivial");
  auto* eta = sub->add_option("--eta", c.eta, "index of eta in [0, q-1)");
  if (required) {
    chi->required();
    eta->required();
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config c;
  c.threads = verify::default_threads();
  CLI::App app{"Character sums over finite fields: evaluation and verification"};
  app.require_subcommand(1);

  std::map<CLI::App*, std::function<Outcome(const Config&)>> handlers;

  auto* s = app.add_subcommand("field-info", "field parameters, generator and tables");
  add_field_options(s, c);
  handlers[s] = field_info;

  s = app.add_subcommand("gauss", "Gauss sum tau(chi, psi)");
  add_field_options(s, c);
  s->add_option("--chi", c.chi, "character index")->required();
  s->add_option("--psi", c.psi, "twist a of psi_a(x) = psi(a x), as an element code")->capture_default_str();
  handlers[s] = gauss;

  s = app.add_subcommand("jacobi", "Jacobi sum J(chi, eta), directly and through Gauss sums");
  add_field_options(s, c);
  add_pair_options(s, c, true);
  handlers[s] = jacobi;

  s = app.add_subcommand("hyper", "hypergeometric sum H(t; chis, etas)");
  add_field_options(s, c);
  s->add_option("--t", c.t, "nonzero element code")->capture_default_str();
  s->add_option("--chis", c.chis, "upper character indices")->delimiter(',');
  s->add_option("--etas", c.etas, "lower character indices")->delimiter(',');
  s->add_option("--path", c.path, "evaluation path")
      ->check(CLI::IsMember({"mellin", "naive", "both"}))
      ->capture_default_str();
  handlers[s] = hyper;

  s = app.add_subcommand("gsum", "the double sum g(chi, eta)");
  add_field_options(s, c);
  add_pair_options(s, c, true);
  s->add_option("--form", c.gform, "summation form")
      ->check(CLI::IsMember({"product", "fraction", "ci"}))
      ->capture_default_str();
  handlers[s] = gsum;

  s = app.add_subcommand("ssum", "S(chi, eta, rho) with rho on the quadratic extension");
  add_field_options(s, c);
  add_pair_options(s, c, true);
  s->add_option("--rho", c.rho, "index in [0, q^2-1)")->required();
  handlers[s] = ssum;

  s = app.add_subcommand("verify-theorem", "compare g against the hypergeometric closed form");
  add_field_options(s, c);
  add_pair_options(s, c, false);
  s->add_flag("--all-pairs", c.all_pairs, "every nontrivial (chi, eta)");
  s->add_option("--witnesses", c.witnesses, "witness primes for the exact check (0 disables)")->capture_default_str();
  s->add_option("--form", c.form, "closed form to test")
      ->check(CLI::IsMember({"corrected", "printed"}))
      ->capture_default_str();
  s->add_flag("--certify", c.certify, "also check every embedding modulo enough primes to exclude coincidence");
  s->add_option("--threads", c.threads, "worker threads (default: CHARSUM_THREADS or hardware)");
  s->add_flag("--report-only", c.report_only, "always exit 0");
  handlers[s] = verify_theorem;

  s = app.add_subcommand("scan", "all checks over every nontrivial pair of one field");
  add_field_options(s, c);
  s->add_option("--threads", c.threads, "worker threads (default: CHARSUM_THREADS or hardware)");
  s->add_option("--witnesses", c.witnesses, "witness primes per pair (0 disables)")->capture_default_str();
  s->add_option("--form", c.form, "closed form to test")
      ->check(CLI::IsMember({"corrected", "printed"}))
      ->capture_default_str();
  s->add_flag("--quadratic-only", c.quadratic_only, "restrict chi to the quadratic character");
  s->add_flag("--report-only", c.report_only, "emit results without failing");
  s->add_flag("--no-paths", c.no_paths, "skip the four-path comparison");
  s->add_flag("--no-hyper", c.no_hyper, "skip the max_t |H(t)| bound");
  s->add_flag("--no-jacobi-gauss", c.no_jacobi_gauss, "skip the Jacobi/Gauss comparison");
  handlers[s] = scan;

  s = app.add_subcommand("witness", "list witness primes, or run the exact check on one pair");
  add_field_options(s, c);
  add_pair_options(s, c, false);
  s->add_option("--count", c.count, "number of primes")->capture_default_str();
  handlers[s] = witness;

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if ((c.chi && !c.eta) || (!c.chi && c.eta)) {
    if (chosen->get_name() == "witness" || chosen->get_name() == "verify-theorem") {
      err << "error: --chi and --eta go together\n";
      return kExitUsage;
    }
  }
  if (chosen->get_name() == "verify-theorem" && !c.all_pairs && !c.chi) {
    err << "error: give --chi and --eta, or --all-pairs\n";
    return kExitUsage;
  }
  if (c.threads == 0) c.threads = 1;

  Outcome result;
  try {
    result = handlers.at(chosen)(c);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  if (c.output.empty()) {
    out << result.text;
  } else {
    std::ofstream file(c.output, std::ios::binary);
    if (!(file << result.text)) {
      err << "error: cannot write " << c.output << '\n';
      return kExitFailure;
    }
  }
  return (result.ok || c.report_only) ? kExitOk : kExitFailure;
}

}  // namespace charsum::cli
