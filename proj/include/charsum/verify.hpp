#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "charsum/characters.hpp"
#include "charsum/gf.hpp"
#include "charsum/sums.hpp"

namespace charsum::verify {

/// A prime ell = 1 (mod L) with zeta of multiplicative order exactly L.
struct WitnessPrime {
  std::uint64_t ell = 0;
  std::uint64_t L = 0;
  std::uint64_t zeta = 0;

  bool operator==(const WitnessPrime&) const = default;
};

inline constexpr std::uint64_t kWitnessSearchCap = std::uint64_t{1} << 31;

/// The `count` smallest primes ell = 1 (mod L) with ell > max(L, 50), each with
/// its smallest element of order L. Throws std::runtime_error when the search
/// passes kWitnessSearchCap, std::invalid_argument for L = 0 or count = 0.
std::vector<WitnessPrime> find_witness_primes(std::uint64_t L, std::size_t count);

/// L = lcm(p, q - 1) = p (q - 1).
std::uint64_t witness_modulus(const gf::FieldTable& field);

/// True iff w is a prime = 1 (mod w.L) and w.zeta has order exactly w.L.
bool valid_witness(const WitnessPrime& w);

/// Exact evaluation of character sums of one field inside GF(ell), with
/// zeta_{q-1} -> zeta^p and zeta_p -> zeta^(q-1).
class WitnessEvaluator {
 public:
  /// Throws std::invalid_argument if w.L differs from witness_modulus(field)
  /// or w is not a valid witness.
  WitnessEvaluator(const gf::FieldTable& field, const WitnessPrime& w);

  const WitnessPrime& witness() const noexcept { return w_; }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const { return (a + b) % w_.ell; }

  /// Image of zeta_{q-1}^e.
  std::uint64_t mul_root(std::uint64_t e) const { return mul_roots_[e % mul_roots_.size()]; }
  /// chi(-1) for chi_j.
  std::uint64_t sign(std::uint32_t j) const;

  /// tau(chi_j) for every j against the canonical additive character.
  std::vector<std::uint64_t> gauss_residues() const;
  /// q^3 (q-1) g(chi, eta).
  std::uint64_t lhs(std::uint32_t chi, std::uint32_t eta) const;
  /// eta(-1) tau(eta) tau(conj chi) tau(chi) sum_rho tau(rho)^3 c(rho eta) c(rho conj chi) c(rho chi)
  /// with c(lambda) = lambda(-1) tau(conj lambda) standing for conj(tau(lambda)).
  std::uint64_t rhs(std::uint32_t chi, std::uint32_t eta, std::span<const std::uint64_t> gauss) const;

 private:
  const gf::FieldTable* field_;
  WitnessPrime w_;
  std::vector<std::uint64_t> mul_roots_;
  std::vector<std::uint64_t> add_roots_;
};

struct Report {
  gf::FieldSpec field;
  std::string identity;
  std::uint32_t chi = 0;
  std::uint32_t eta = 0;
  sums::SumValue lhs;
  sums::SumValue rhs;
  double abs_diff = 0.0;
  double tolerance = 0.0;
  std::vector<bool> witness_pass;
  bool pass = false;

  /// Recomputes abs_diff and pass from the other fields.
  void finalize();
};

/// Checks the denominator-free Gauss-form chain modulo each witness prime.
/// lhs/rhs carry g from g_direct and g_gauss_form numerically, plus the two
/// cleared residues per witness. gauss_override replaces the tau residues
/// (one vector per witness) and exists for tamper tests.
Report witness_check(const sums::GaussTable& table, const chars::MulCharacter& chi,
                     const chars::MulCharacter& eta, std::span<const WitnessPrime> witnesses,
                     const std::vector<std::vector<std::uint64_t>>* gauss_override = nullptr);

/// Both sides are algebraic integers of Z[zeta_L] whose conjugates are all
/// bounded by B = q^5 (q - 1). If the residues agree modulo primes with
/// product above 2B under every primitive choice of zeta, the difference has
/// every conjugate divisible by that product and smaller than it, hence zero.
struct Certificate {
  std::vector<std::uint64_t> primes;
  std::uint64_t embeddings_checked = 0;
  long double height_bound = 0;
  bool certified = false;
};

std::uint64_t witness_height_bound(const gf::FieldTable& field);
Certificate certify_pair(const gf::FieldTable& field, std::uint32_t chi, std::uint32_t eta);

struct TheoremOptions {
  sums::TheoremForm form = sums::TheoremForm::corrected;
  sums::HyperPath path = sums::HyperPath::mellin;
  std::size_t witnesses = 0;
};

const char* identity_name(sums::TheoremForm form);

/// g_direct against theorem_rhs at tolerance 1e-6 q; witness results
/// attached when options.witnesses > 0.
Report check_theorem(const sums::GaussTable& table, const chars::MulCharacter& chi,
                     const chars::MulCharacter& eta, const TheoremOptions& options = {});

/// Runs body(i) for i in [0, count) over `threads` workers. Each index is
/// visited exactly once; ordering of side effects is the caller's concern.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

/// Default worker count: CHARSUM_THREADS if set and positive, else hardware
/// concurrency, else 1.
unsigned default_threads();

struct ScanOptions {
  unsigned threads = 1;
  bool quadratic_only = false;
  std::size_t witnesses = 0;
  sums::TheoremForm form = sums::TheoremForm::corrected;
  bool check_paths = true;
  bool check_hyper = true;
  bool check_jacobi_gauss = true;
  /// Forced on for characteristic 2.
  bool report_only = false;
};

struct ScanRow {
  Report theorem;
  /// |g - rhs| under the printed prefactor and lower tuple.
  double printed_diff = 0.0;
  /// Largest pairwise distance among the four g paths; 0 when not run.
  double path_diff = 0.0;
  double max_h = 0.0;
  bool chi_quadratic = false;
  /// g is real when chi(-1) = 1 and purely imaginary otherwise.
  bool parity_ok = true;
  bool bound_ok = true;
  bool paths_ok = true;
  bool hyper_ok = true;
  bool pass = false;
};

struct ScanAggregates {
  std::size_t pairs = 0;
  std::size_t failures = 0;
  std::size_t witness_failures = 0;
  std::size_t printed_form_mismatches = 0;
  /// Quadratic-chi rows with |Im g| above tolerance.
  std::size_t realness_violations = 0;
  double max_g_over_q = 0.0;
  double max_h = 0.0;
  double max_abs_diff = 0.0;
  double max_path_diff = 0.0;
  double max_im_g_quadratic = 0.0;
  std::size_t jacobi_gauss_pairs = 0;
  std::size_t jacobi_gauss_failures = 0;
  double max_jacobi_gauss_diff = 0.0;
};

struct ScanReport {
  gf::FieldSpec field;
  ScanOptions options;
  bool report_only = false;
  std::vector<ScanRow> rows;
  ScanAggregates aggregates;
  bool pass = false;

  /// Recomputes the row-derived aggregates and the overall flag.
  void finalize();
};

/// Throws std::invalid_argument for q < 3.
ScanReport scan_field(const gf::FieldTable& field, const ScanOptions& options = {});

/// Direct Jacobi sums against q^-1 tau(a) tau(b) conj(tau(ab)) for every pair
/// except (1, 1) at tolerance 1e-8 q, plus J(1, 1) = q - 2 exactly.
struct JacobiGaussResult {
  std::size_t pairs = 0;
  std::size_t failures = 0;
  double max_diff = 0.0;
  bool trivial_exact = false;
};
JacobiGaussResult check_jacobi_gauss(const sums::GaussTable& gauss, const sums::JacobiTable& jacobi);

nlohmann::json to_json(const sums::SumValue& v);
nlohmann::json to_json(const Report& r);
nlohmann::json to_json(const ScanReport& r);
nlohmann::json to_json(const WitnessPrime& w);

std::string csv_header();
std::string to_csv(const ScanReport& r);
/// %.12g, with -0 printed as 0.
std::string format_number(double x);

}  // namespace charsum::verify
