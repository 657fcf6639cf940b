#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "renormlab/errors.hpp"
#include "renormlab/form.hpp"
#include "renormlab/green.hpp"
#include "renormlab/measure.hpp"
#include "renormlab/renorm.hpp"

using namespace renormlab;

namespace {

DiscreteForm p3() { return build_local_form({1, 3, 0.0, 4.0, {}}); }

SignedMeasure center_dirac() {
  SignedMeasure mu(3);
  mu.set(1, 1.0, MassTag::concentrated);
  return mu;
}

double xorshift_unit(std::uint64_t& s) {
  s ^= s << 13;
  s ^= s >> 7;
  s ^= s << 17;
  return static_cast<double>(s >> 11) * 0x1.0p-53;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("truncate clamps nodewise") {
  const std::vector<double> u{0.5, 1.0, 0.5};
  CHECK(truncate(u, 0.75) == std::vector<double>{0.5, 0.75, 0.5});
  CHECK(truncate(u, 2.0) == u);
  CHECK(truncate(u, 0.0) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK_THROWS_AS(truncate(u, -1.0), ConfigError);
}

TEST_CASE("extract_nu: stencil on the clamped vector") {
  const DiscreteForm form = p3();
  const std::vector<double> u{0.5, 1.0, 0.5};
  const SignedMeasure nu = extract_nu(form, u, SignedMeasure(3), 0.75);
  CHECK(nu.mass(0) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(nu.mass(1) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(nu.mass(2) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(nu.tv_norm() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("extract_nu at k >= sup u recovers mu - mu_d") {
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  SignedMeasure mu(3);
  mu.set(0, 0.3, MassTag::diffuse);
  mu.set(1, 1.0, MassTag::concentrated);
  const std::vector<double> u = green.apply(mu);
  const auto [mu_d, mu_c] = mu.decompose();
  const SignedMeasure nu = extract_nu(form, u, mu_d, 10.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(nu.mass(i) == doctest::Approx(mu_c.mass(i)).epsilon(1e-10));
  }

  // diffuse-only data: nu vanishes once the truncation is inactive
  SignedMeasure diffuse(3);
  diffuse.set(0, 0.3, MassTag::diffuse);
  diffuse.set(2, -0.1, MassTag::diffuse);
  const std::vector<double> v = green.apply(diffuse);
  const SignedMeasure nu2 = extract_nu(form, v, diffuse, 10.0);
  CHECK(nu2.tv_norm() <= 1e-10);
}

TEST_CASE("jump_lambda: hand kernel sums on P3") {
  const DiscreteForm form = p3();
  const std::vector<double> u{0.5, 1.0, 0.5};

  const SignedMeasure j_pos = jump_lambda(form, u, 0.75);
  CHECK(j_pos.mass(0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(j_pos.mass(1) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(j_pos.mass(2) == doctest::Approx(0.5).epsilon(1e-13));

  const SignedMeasure j_neg = jump_lambda(form, u, -0.75);
  CHECK(j_neg.tv_norm() == doctest::Approx(0.0));

  const SignedMeasure j_zero = jump_lambda(form, u, 0.0);
  CHECK(j_zero.tv_norm() == doctest::Approx(0.0));
}

TEST_CASE("jump_lambda is nonnegative entrywise (convexity gaps)") {
  const DiscreteForm frac = build_fractional_form({16, 0.0, 1.0, 0.4, 1.0});
  std::uint64_t s = 2024;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> u(frac.size());
    for (auto& x : u) x = 4.0 * xorshift_unit(s) - 2.0;
    const double a = 3.0 * xorshift_unit(s) - 1.5;
    const SignedMeasure j = jump_lambda(frac, u, a);
    for (int i = 0; i < j.size(); ++i) CHECK(j.mass(i) >= -1e-13);
  }
}

TEST_CASE("structure identities vanish on the P3 Dirac instance") {
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  const SignedMeasure mu = center_dirac();
  const std::vector<double> u = green.apply(mu);
  const StructureResiduals res = structure_check(form, u, mu, 0.75);
  CHECK(res.corollary <= 1e-12);
  CHECK(res.positive_part <= 1e-12);
  CHECK(res.negative_part <= 1e-12);

  // hand check of the positive-part identity pieces
  const std::vector<double> upk{0.5, 0.75, 0.5};
  const std::vector<double> l_upk = form.apply_stiffness(upk);
  CHECK(l_upk[0] == doctest::Approx(0.25));
  CHECK(l_upk[1] == doctest::Approx(0.5));
  CHECK(l_upk[2] == doctest::Approx(0.25));
}

TEST_CASE("structure identities hold for signed diffuse data on a 16x16 grid") {
  const DiscreteForm form = build_local_form({2, 16, 0.0, 1.0, {}});
  const GreenOperator green(form);
  std::uint64_t s = 4242;
  SignedMeasure mu(form.size());
  for (int i = 0; i < form.size(); ++i) {
    mu.set(i, 2.0 * xorshift_unit(s) - 1.0, MassTag::diffuse);
  }
  const std::vector<double> u = green.apply(mu);
  double sup = 0.0;
  for (double x : u) sup = std::max(sup, std::abs(x));
  for (double frac : {0.1, 0.35, 0.6, 0.9}) {
    const StructureResiduals res = structure_check(form, u, mu, frac * sup);
    CHECK(res.corollary <= 1e-10 * res.scale);
    CHECK(res.positive_part <= 1e-10 * res.scale);
    CHECK(res.negative_part <= 1e-10 * res.scale);
  }
}

TEST_CASE("structure identities hold on fractional lattices") {
  const DiscreteForm form = build_fractional_form({48, 0.0, 1.0, 0.5, 1.0});
  const GreenOperator green(form);
  SignedMeasure mu(form.size());
  mu.set(form.size() / 2, 1.0, MassTag::concentrated);
  mu.set(5, 0.25, MassTag::diffuse);
  const std::vector<double> u = green.apply(mu);
  double sup = 0.0;
  for (double x : u) sup = std::max(sup, std::abs(x));
  const StructureResiduals res = structure_check(form, u, mu, 0.5 * sup);
  CHECK(res.corollary <= 1e-10 * res.scale);
  CHECK(res.positive_part <= 1e-10 * res.scale);
  CHECK(res.negative_part <= 1e-10 * res.scale);
}

TEST_CASE("verify_renormalized on the P3 Dirac pipeline") {
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  const SignedMeasure mu = center_dirac();
  const std::vector<double> u = green.apply(mu);
  const TestDictionary dict = TestDictionary::standard(form.space(), {{2.0, 0.0}});
  const std::vector<double> ks{0.25, 0.5, 0.75};
  const TruncationReport report = verify_renormalized(form, u, mu, ks, dict);
  REQUIRE(report.records.size() == 3);

  // TV(nu_k): mass conservation needs k >= u at the kappa-carrying nodes (0.5)
  CHECK(report.records[0].tv == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.records[1].tv == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.records[2].tv == doctest::Approx(1.0).epsilon(1e-12));

  // <j_k/2, 1> climbs to <mu_c^+, 1> = 1 along the schedule
  CHECK(report.records[0].half_lambda_total == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.records[1].half_lambda_total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.records[2].half_lambda_total == doctest::Approx(1.0).epsilon(1e-12));

  for (const TruncationRecord& rec : report.records) {
    CHECK(rec.structure.corollary <= 1e-12);
    // E(T_k u, T_k u) nondecreasing in k
  }
  CHECK(report.records[0].truncation_energy <= report.records[1].truncation_energy + 1e-12);
  CHECK(report.records[1].truncation_energy <= report.records[2].truncation_energy + 1e-12);
}

TEST_CASE("weak identity E(T_k u, eta) = <mu_d + nu_k, eta> is definitional") {
  const DiscreteForm form = build_local_form({2, 8, 0.0, 1.0, {}});
  const GreenOperator green(form);
  std::uint64_t s = 31337;
  SignedMeasure mu(form.size());
  for (int i = 0; i < form.size(); ++i) {
    mu.set(i, 2.0 * xorshift_unit(s) - 1.0, MassTag::diffuse);
  }
  const std::vector<double> u = green.apply(mu);
  const TestDictionary dict = TestDictionary::standard(form.space());
  const auto [mu_d, mu_c] = mu.decompose();
  for (double k : {0.05, 0.2}) {
    const SignedMeasure nu = extract_nu(form, u, mu_d, k);
    const std::vector<double> tk = truncate(u, k);
    for (int e = 0; e < dict.size(); ++e) {
      const std::vector<double> eta = dict.on_nodes(e, form.space());
      CHECK(form.energy(tk, eta) ==
            doctest::Approx(mu_d.pair(eta) + nu.pair(eta)).epsilon(1e-10));
    }
  }
}

TEST_CASE("smooth-data TV decay: zero at the end, bounded truncation energies") {
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  SignedMeasure mu = SignedMeasure::from_masses({1.0, 1.0, 1.0}, MassTag::diffuse);
  const std::vector<double> u = green.apply(mu);  // (1.5, 2, 1.5)
  CHECK(u[1] == doctest::Approx(2.0).epsilon(1e-12));

  const SignedMeasure nu_end = extract_nu(form, u, mu, 2.0);
  CHECK(nu_end.tv_norm() <= 1e-10 * mu.tv_norm());

  // jump-part bound E(u, T_k u) <= k ||mu||_TV, and monotone truncation energy
  double prev_energy = -1.0;
  for (double k : {1.5, 1.75, 2.0, 5.0}) {
    const std::vector<double> tk = truncate(u, k);
    const double cross = form.energy_part(u, tk, true) + form.energy_part(u, tk, false);
    CHECK(cross <= k * mu.tv_norm() + 1e-9);
    const double ek = form.energy(tk, tk);
    CHECK(ek >= prev_energy - 1e-12);
    prev_energy = ek;
  }
}

TEST_CASE("refinement study: 2D Dirac trends") {
  RefinementSpec spec;
  spec.kind = RefinementSpec::Kind::local2d;
  spec.n_values = {7, 15, 31};
  const Atom atom{{0.5, 0.5}, 1.0, MassTag::concentrated};
  const RefinementReport report = refinement_study(spec, {&atom, 1});
  REQUIRE(report.rows.size() == 3);
  CHECK(report.bl_monotone);
  CHECK(report.capacity_monotone);
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].atom_capacity < report.rows[i - 1].atom_capacity);
    CHECK(report.rows[i].sup_u > report.rows[i - 1].sup_u);
  }
  // mass conservation of nu at k = theta sup u (exact on pure-jump lattices)
  for (const RefinementRow& row : report.rows) {
    CHECK(row.nu_tv == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("refinement study refuses settings with persistent point capacity") {
  const Atom atom{{0.5, 0.0}, 1.0, MassTag::concentrated};
  RefinementSpec local1d;
  local1d.kind = RefinementSpec::Kind::local1d;
  local1d.n_values = {7, 15};
  CHECK_THROWS_AS(refinement_study(local1d, {&atom, 1}), ConfigError);

  RefinementSpec frac;
  frac.kind = RefinementSpec::Kind::fractional1d;
  frac.n_values = {16, 32};
  frac.alpha = 0.75;
  CHECK_THROWS_AS(refinement_study(frac, {&atom, 1}), ConfigError);

  // alpha <= 1/2 is accepted
  frac.alpha = 0.4;
  CHECK_NOTHROW(refinement_study(frac, {&atom, 1}));
}

TEST_CASE("verify_aab: identity residuals and plateau energies") {
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  SignedMeasure mu = SignedMeasure::from_masses({0.2, 0.6, 0.1}, MassTag::diffuse);
  const std::vector<double> u = green.apply(mu);
  double sup = 0.0;
  for (double x : u) sup = std::max(sup, std::abs(x));

  const std::vector<CompactFunction> hs = standard_h_dictionary(std::max(1.0, sup));
  const TestDictionary etas = TestDictionary::standard(form.space());
  const std::vector<double> ks{0.25 * sup, 0.5 * sup, sup};
  const AabReport report = verify_aab(form, u, mu, hs, etas, ks);
  CHECK(report.max_relative_residual <= 1e-9);
  CHECK(report.phi_nonincreasing);
  CHECK(report.phi_final == doctest::Approx(0.0));

  // E(u, Phi_k(u)) vanishes exactly once k >= sup u
  const std::vector<double> phi = plateau(u, sup);
  CHECK(form.energy(u, phi) == doctest::Approx(0.0));
}

TEST_CASE("verify_aab refuses concentrated data") {
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  const SignedMeasure mu = center_dirac();
  const std::vector<double> u = green.apply(mu);
  const std::vector<CompactFunction> hs = standard_h_dictionary(1.0);
  const TestDictionary etas = TestDictionary::standard(form.space());
  const std::vector<double> ks{0.5};
  CHECK_THROWS_AS(verify_aab(form, u, mu, hs, etas, ks), ConfigError);
}

TEST_CASE("semilinear: linear absorption has the closed-form solution") {
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  const SignedMeasure mu = center_dirac();
  const auto f = [](int, double s) { return -s; };
  const std::vector<double> u = solve_semilinear(green, f, mu, {}, {0.5, 1e-13, 4000});
  CHECK(std::abs(u[0] - 1.0 / 7.0) <= 1e-10);
  CHECK(std::abs(u[1] - 3.0 / 7.0) <= 1e-10);
  CHECK(std::abs(u[2] - 1.0 / 7.0) <= 1e-10);
}

TEST_CASE("semilinear: zero field reduces to the linear potential") {
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  const SignedMeasure mu = center_dirac();
  const auto f = [](int, double) { return 0.0; };
  CHECK(max_abs_diff(solve_semilinear(green, f, mu, {}, {0.5, 1e-13, 4000}),
                     green.apply(mu)) <= 1e-10);
}

TEST_CASE("semilinear: two starts agree (uniqueness witness)") {
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  const SignedMeasure mu = center_dirac();
  const auto f = [](int, double s) { return -s * s * s; };
  const std::vector<double> a = solve_semilinear(green, f, mu);
  const std::vector<double> b = solve_semilinear(green, f, mu, green.apply(mu));
  CHECK(max_abs_diff(a, b) <= 1e-8);
}

TEST_CASE("semilinear comparison: larger data gives larger solutions") {
  const DiscreteForm form = build_local_form({1, 7, 0.0, 8.0, {}});
  const GreenOperator green(form);
  const auto f = [](int, double s) { return -s * std::abs(s); };
  std::uint64_t s = 777;
  for (int trial = 0; trial < 5; ++trial) {
    SignedMeasure mu1(form.size()), mu2(form.size());
    for (int i = 0; i < form.size(); ++i) {
      const double base = 2.0 * xorshift_unit(s) - 1.0;
      mu1.set(i, base, MassTag::diffuse);
      mu2.set(i, base + xorshift_unit(s), MassTag::diffuse);
    }
    const std::vector<double> u1 = solve_semilinear(green, f, mu1);
    const std::vector<double> u2 = solve_semilinear(green, f, mu2);
    for (int i = 0; i < form.size(); ++i) CHECK(u1[i] <= u2[i] + 1e-7);
  }
}
