// Acceptance suite: one criterion per function, one pass/fail line each.
// Exit code equals the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "renormlab/continuum.hpp"
#include "renormlab/form.hpp"
#include "renormlab/green.hpp"
#include "renormlab/mc.hpp"
#include "renormlab/measure.hpp"
#include "renormlab/renorm.hpp"

using namespace renormlab;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::vector<std::string> failures;
  double runtime_seconds = 0.0;
  double runtime_limit = 0.0;  // 0: no stated limit

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void require_le(double value, double bound, const std::string& what) {
    if (!(value <= bound)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: %.3e > %.3e", what.c_str(), value, bound);
      failures.push_back(buf);
    }
  }
};

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double xorshift_unit(std::uint64_t& s) {
  s ^= s << 13;
  s ^= s >> 7;
  s ^= s << 17;
  return static_cast<double>(s >> 11) * 0x1.0p-53;
}

DiscreteForm p3() { return build_local_form({1, 3, 0.0, 4.0, {}}); }

SignedMeasure p3_dirac() {
  SignedMeasure mu(3);
  mu.set(1, 1.0, MassTag::concentrated);
  return mu;
}

// 16^2 grid with a smooth bump density plus a concentrated atom at the centre.
std::pair<DiscreteForm, SignedMeasure> grid16_mixed() {
  DiscreteForm form = build_local_form({2, 16, 0.0, 1.0, {}});
  SignedMeasure mu = SignedMeasure::from_density(
      form.space(),
      [](const Point& p) {
        const double t = std::min(distance(p, {0.5, 0.5}) / 0.35, 1.0);
        const double v = std::cos(0.5 * M_PI * t);
        return v * v;
      },
      MassTag::diffuse);
  const int atom = form.space().nearest_node({0.5, 0.5});
  mu.set(atom, 0.0, MassTag::untagged);
  mu.add_atom(atom, 0.5, MassTag::concentrated);
  return {std::move(form), std::move(mu)};
}

// ---------------------------------------------------------------------------

void criterion_1(Criterion& c) {  // P3 exact pipeline
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  const SignedMeasure mu = p3_dirac();
  const std::vector<double> u = green.apply(mu);
  const double expected_u[3] = {0.5, 1.0, 0.5};
  for (int i = 0; i < 3; ++i) {
    c.require_le(std::abs(u[i] - expected_u[i]), 1e-12, "u[" + std::to_string(i) + "]");
  }
  const SignedMeasure nu = extract_nu(form, u, SignedMeasure(3), 0.75);
  const double expected_nu[3] = {0.25, 0.5, 0.25};
  for (int i = 0; i < 3; ++i) {
    c.require_le(std::abs(nu.mass(i) - expected_nu[i]), 1e-12,
                 "nu_{0.75}[" + std::to_string(i) + "]");
  }
  const SignedMeasure jp = jump_lambda(form, u, 0.75);
  const double expected_j[3] = {0.5, 1.0, 0.5};
  for (int i = 0; i < 3; ++i) {
    c.require_le(std::abs(jp.mass(i) - expected_j[i]), 1e-12,
                 "j_{0.75}[" + std::to_string(i) + "]");
  }
  c.require_le(jump_lambda(form, u, -0.75).tv_norm(), 1e-12, "j_{-0.75}");
  const StructureResiduals res = structure_check(form, u, mu, 0.75);
  c.require_le(res.corollary, 1e-12, "structure corollary residual");
  c.require_le(res.positive_part, 1e-12, "structure positive-part residual");
  c.require_le(res.negative_part, 1e-12, "structure negative-part residual");
}

void criterion_2(Criterion& c) {  // potential identities, 16^2 mixed data
  auto [form, mu] = grid16_mixed();
  const GreenOperator green(form);
  const std::vector<double> u = green.apply(mu);
  const double scale = std::max(1.0, mu.tv_norm());

  const TestDictionary dict = TestDictionary::standard(form.space(), {{0.5, 0.5}});
  std::vector<std::pair<std::string, std::vector<double>>> etas;
  for (int e = 0; e < 6; ++e) {
    etas.emplace_back(dict.member(e).name, dict.on_nodes(e, form.space()));
  }
  const PotentialIdentityReport rep = verify_potential_identities(green, mu, etas);
  for (const PotentialIdentityRow& row : rep.rows) {
    c.require_le(row.duality_residual, 1e-8 * row.scale, "duality[" + row.eta_name + "]");
    c.require_le(row.very_weak_residual, 1e-8 * row.scale,
                 "very-weak[" + row.eta_name + "]");
  }

  // Lemma R(-A eta) = eta for a bounded eta
  const std::vector<double> eta = dict.on_nodes(3, form.space());
  const std::vector<double> l_eta = form.apply_stiffness(eta);
  std::vector<double> minus_a_eta(form.size());
  for (int x = 0; x < form.size(); ++x) {
    minus_a_eta[x] = l_eta[x] / form.space().volume(x);
  }
  const std::vector<double> back = green.resolvent(0.0, minus_a_eta);
  double lemma = 0.0;
  for (int x = 0; x < form.size(); ++x) {
    lemma = std::max(lemma, std::abs(back[x] - eta[x]));
  }
  c.require_le(lemma, 1e-8 * scale, "lemma R(-A eta) = eta");

  // resolvent identity R_1 - R_2 = (2-1) R_1 R_2
  std::uint64_t s = 6060;
  std::vector<double> f(form.size());
  for (auto& x : f) x = 2.0 * xorshift_unit(s) - 1.0;
  const std::vector<double> r1 = green.resolvent(1.0, f);
  const std::vector<double> r2 = green.resolvent(2.0, f);
  const std::vector<double> r1r2 = green.resolvent(1.0, r2);
  double rid = 0.0;
  for (int x = 0; x < form.size(); ++x) {
    rid = std::max(rid, std::abs(r1[x] - r2[x] - r1r2[x]));
  }
  c.require_le(rid, 1e-8 * scale, "resolvent identity");
}

void criterion_3(Criterion& c) {  // reconstruction and occupation identities
  const LogPotential2d ex({512, 1e-6});
  auto one = [](double) { return 1.0; };
  const std::pair<double, double> pairs[5] = {
      {1.0, 2.0}, {0.5, 1.5}, {2.0, 3.0}, {5.0, 5.1}, {0.25, 4.0}};
  for (const auto& [b, cc] : pairs) {
    c.require_le(std::abs(ex.reconstruction(b, cc, one) - 2.0), 1e-6,
                 "reconstruction(b=" + std::to_string(b) + ")");
  }
  const auto occ = ex.occupation(one, 1.0, 2.0, one);
  c.require_le(std::abs(occ.lhs - occ.rhs),
               1e-6 * std::max({1.0, std::abs(occ.lhs), std::abs(occ.rhs)}),
               "occupation lhs vs rhs");
  for (double a : {0.5, 1.0, 5.0}) {
    c.require_le(std::abs(ex.local_time_mass(a, one) - 2.0), 1e-6,
                 "<l_a, 1> at a=" + std::to_string(a));
  }
}

void criterion_4(Criterion& c) {  // 2D Dirac refinement study
  RefinementSpec spec;
  spec.kind = RefinementSpec::Kind::local2d;
  spec.n_values = {7, 15, 31, 63};  // h = 1/8 .. 1/64
  spec.theta = 0.5;
  const Atom atom{{0.5, 0.5}, 1.0, MassTag::concentrated};
  const RefinementReport rep = refinement_study(spec, {&atom, 1});
  c.require(rep.bl_monotone, "bl_distance nonincreasing (10% slack)");
  c.require(rep.capacity_monotone, "atom capacity monotone decreasing");
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    c.require(rep.rows[i].atom_capacity < rep.rows[i - 1].atom_capacity,
              "capacity strictly decreasing at mesh " + std::to_string(i));
  }
  const RefinementRow& last = rep.rows.back();
  c.require_le(last.bl_to_atoms, 0.1, "bl_distance at h = 1/64");
  c.require_le(std::abs(last.nu_tv - 1.0), 0.1, "|nu|(E) within 10% of 1");
}

void criterion_5(Criterion& c) {  // smooth-data TV decay
  const DiscreteForm form = build_local_form({2, 16, 0.0, 1.0, {}});
  const GreenOperator green(form);
  const SignedMeasure mu = SignedMeasure::from_density(
      form.space(),
      [](const Point& p) {
        const double t = std::min(distance(p, {0.5, 0.5}) / 0.35, 1.0);
        const double v = std::cos(0.5 * M_PI * t);
        return v * v;
      },
      MassTag::diffuse);
  const std::vector<double> u = green.apply(mu);
  const double sup = sup_abs(u);

  // upper-half quantile schedule of |u| ending above sup
  std::vector<double> sorted(u.begin(), u.end());
  for (double& x : sorted) x = std::abs(x);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> ks;
  for (int i = 1; i <= 8; ++i) {
    const double p = 0.5 + 0.5 * double(i) / 8.0;
    ks.push_back(sorted[static_cast<std::size_t>(p * (sorted.size() - 1))]);
  }
  ks.push_back(1.25 * sup);

  double prev = 1e300;
  for (double k : ks) {
    const double tv = extract_nu(form, u, mu, k).tv_norm();
    c.require_le(tv, prev + 1e-12 * mu.tv_norm(),
                 "TV nonincreasing at k=" + std::to_string(k));
    prev = tv;
    if (k >= sup) {
      c.require_le(tv, 1e-10 * mu.tv_norm(), "TV zero at k >= sup u");
    }
  }
}

void criterion_6(Criterion& c) {  // AAB renormalisation conditions
  const DiscreteForm form = build_local_form({2, 16, 0.0, 1.0, {}});
  const GreenOperator green(form);
  const SignedMeasure mu = SignedMeasure::from_density(
      form.space(),
      [](const Point& p) {
        const double t = std::min(distance(p, {0.5, 0.5}) / 0.35, 1.0);
        const double v = std::cos(0.5 * M_PI * t);
        return v * v;
      },
      MassTag::diffuse);
  const std::vector<double> u = green.apply(mu);
  const double sup = sup_abs(u);

  const std::vector<CompactFunction> hs = standard_h_dictionary(std::max(1.0, sup));
  const TestDictionary full = TestDictionary::standard(form.space());
  std::vector<TestDictionary::Member> first5;
  for (int i = 0; i < 5; ++i) first5.push_back(full.member(i));
  const TestDictionary etas(std::move(first5), form.space());

  std::vector<double> ks;
  for (int i = 1; i <= 6; ++i) ks.push_back(sup * i / 6.0);
  const AabReport rep = verify_aab(form, u, mu, hs, etas, ks);
  c.require(static_cast<int>(hs.size()) == 3, "3-function h dictionary");
  c.require(etas.size() == 5, "5-function eta dictionary");
  for (const AabIdentityRow& row : rep.identities) {
    c.require_le(row.residual, 1e-9 * row.scale,
                 "identity " + row.h_name + " x " + row.eta_name);
  }
  c.require(rep.phi_nonincreasing, "E(u, Phi_k(u)) nonincreasing");
  c.require_le(std::abs(rep.phi_final), 1e-12 * std::max(1.0, mu.tv_norm()),
               "E(u, Phi_k(u)) -> 0");
}

void criterion_7(Criterion& c) {  // Monte Carlo: Revuz, Dynkin, determinism
  McConfig cfg;
  cfg.n_paths = 10000;
  cfg.seed = 20260810;

  {  // P3
    const DiscreteForm form = p3();
    const GreenOperator green(form);
    const SignedMeasure mu = p3_dirac();
    const std::vector<double> u = green.apply(mu);
    const std::vector<double> ones(3, 1.0);
    const McEstimate revuz = revuz_check(form, green, mu, ones, 1, cfg);
    c.require(revuz.within(3.0), "P3 Revuz within 3 sigma");
    const DynkinResult dynkin = dynkin_check(form, green, u, mu, 0.75, 0, cfg);
    c.require(dynkin.optional_stopping.within(3.0), "P3 Dynkin within 3 sigma");

    const McEstimate replay = revuz_check(form, green, mu, ones, 1, cfg);
    c.require(std::memcmp(&replay.mean, &revuz.mean, sizeof(double)) == 0 &&
                  std::memcmp(&replay.std_error, &revuz.std_error,
                              sizeof(double)) == 0,
              "bitwise determinism under the same seed");

    const BatteryResult battery =
        identity_battery(form, green, mu, u, 0.75, 0, cfg, 20);
    c.require(battery.pass_rate() >= 0.95,
              "P3 battery pass rate " + std::to_string(battery.n_passed) + "/20");
  }
  {  // 8^2 grid with mixed data
    DiscreteForm form = build_local_form({2, 8, 0.0, 1.0, {}});
    SignedMeasure mu = SignedMeasure::from_density(
        form.space(), [](const Point&) { return 0.5; }, MassTag::diffuse);
    const int atom = form.space().nearest_node({0.45, 0.45});
    mu.set(atom, 0.0, MassTag::untagged);
    mu.add_atom(atom, 1.0, MassTag::concentrated);
    const GreenOperator green(form);
    const std::vector<double> u = green.apply(mu);
    const double k = 0.75 * sup_abs(u);
    std::vector<double> ones(form.size(), 1.0);
    const McEstimate revuz = revuz_check(form, green, mu.positive_part(), ones, 0, cfg);
    c.require(revuz.within(3.0), "8^2 Revuz within 3 sigma");
    const DynkinResult dynkin = dynkin_check(form, green, u, mu, k, 0, cfg);
    c.require(dynkin.optional_stopping.within(3.0), "8^2 Dynkin within 3 sigma");
    const BatteryResult battery = identity_battery(form, green, mu, u, k, 0, cfg, 20);
    c.require(battery.pass_rate() >= 0.95,
              "8^2 battery pass rate " + std::to_string(battery.n_passed) + "/20");
  }
}

void criterion_8(Criterion& c) {  // obstacle approximants
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  const std::vector<double> h{1.0, 0.0, 0.0};
  const std::vector<double> g(3, 1.0);
  const double hmax = 1.0;

  std::vector<double> prev;
  for (double n : {0.0, 1.0, 10.0, 1e3, 1e6, 1e9}) {
    const std::vector<double> v = excessive_majorant(green, h, n, g);
    for (int i = 0; i < 3; ++i) {
      c.require(v[i] >= h[i] - 1e-12, "h <= h^1_n at node " + std::to_string(i));
      c.require(v[i] <= hmax + 1e-12, "h^1_n <= sup|h| at node " + std::to_string(i));
      if (!prev.empty()) {
        c.require(v[i] <= prev[i] + 1e-10, "monotone nonincreasing in n");
      }
    }
    prev = v;
  }
  const std::vector<double> v9 = excessive_majorant(green, h, 1e9, g);
  double gap = 0.0;
  for (int i = 0; i < 3; ++i) gap = std::max(gap, std::abs(v9[i] - h[i]));
  c.require_le(gap, 1e-6, "||h^1_n - h|| at n = 1e9");

  const std::vector<double> reduite = excessive_majorant(green, h, 0.0, g);
  const double expected[3] = {1.0, 2.0 / 3.0, 1.0 / 3.0};
  for (int i = 0; i < 3; ++i) {
    c.require_le(std::abs(reduite[i] - expected[i]), 1e-10,
                 "reduite node " + std::to_string(i));
  }
}

void criterion_9(Criterion& c) {  // semilinear uniqueness witness
  const DiscreteForm form = p3();
  const GreenOperator green(form);
  const SignedMeasure mu = p3_dirac();
  const SemilinearConfig tight{0.5, 1e-13, 4000};

  const auto linear = [](int, double s) { return -s; };
  const std::vector<double> exact = solve_semilinear(green, linear, mu, {}, tight);
  const double expected[3] = {1.0 / 7.0, 3.0 / 7.0, 1.0 / 7.0};
  for (int i = 0; i < 3; ++i) {
    c.require_le(std::abs(exact[i] - expected[i]), 1e-10,
                 "exact example node " + std::to_string(i));
  }

  const auto cubic = [](int, double s) { return -s * s * s; };
  const std::vector<double> a = solve_semilinear(green, cubic, mu);
  const std::vector<double> b = solve_semilinear(green, cubic, mu, green.apply(mu));
  double gap = 0.0;
  for (int i = 0; i < 3; ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
  c.require_le(gap, 1e-8, "two-start agreement");

  // comparison monotonicity on 20 random instance pairs
  const DiscreteForm line = build_local_form({1, 7, 0.0, 8.0, {}});
  const GreenOperator gl(line);
  const auto field = [](int, double s) { return -s * std::abs(s); };
  std::uint64_t s = 20260810;
  for (int trial = 0; trial < 20; ++trial) {
    SignedMeasure m1(line.size()), m2(line.size());
    for (int i = 0; i < line.size(); ++i) {
      const double base = 2.0 * xorshift_unit(s) - 1.0;
      m1.set(i, base, MassTag::diffuse);
      m2.set(i, base + xorshift_unit(s), MassTag::diffuse);
    }
    const std::vector<double> u1 = solve_semilinear(gl, field, m1, {}, tight);
    const std::vector<double> u2 = solve_semilinear(gl, field, m2, {}, tight);
    for (int i = 0; i < line.size(); ++i) {
      c.require(u1[i] <= u2[i] + 1e-10,
                "comparison pair " + std::to_string(trial) + " node " +
                    std::to_string(i));
    }
  }
}

void criterion_10(Criterion& c) {  // fractional cross-validation
  const double alpha = 0.5, cc = 1.0;
  const DiscreteForm form = build_fractional_form({256, 0.0, 1.0, alpha, cc});
  const GreenOperator green(form);
  const SignedMeasure mu = SignedMeasure::from_density(
      form.space(),
      [](const Point& p) {
        const double t = std::min(std::abs(p[0] - 0.5) / 0.35, 1.0);
        const double v = std::cos(0.5 * M_PI * t);
        return v * v;
      },
      MassTag::diffuse);
  const std::vector<double> u = green.apply(mu);
  const double k = 0.5 * sup_abs(u);
  const SignedMeasure j = jump_lambda(form, u, k);
  const Profile1d prof = lattice_profile(form.space(), u, 0.0, 1.0);

  Riesz1dExample ex;
  ex.alpha = alpha;
  ex.constant = cc;
  std::vector<int> nodes;
  std::vector<double> pts;
  for (double frac : {0.15, 0.35, 0.5, 0.65, 0.85}) {
    const int node = static_cast<int>(frac * form.size());
    nodes.push_back(node);
    pts.push_back(form.space().position(node)[0]);
  }
  const std::vector<double> quad = riesz_jk_quadrature(ex, prof, k, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double lattice = j.mass(nodes[i]) / form.space().volume(nodes[i]);
    c.require_le(std::abs(quad[i] - lattice) / std::abs(lattice), 0.02,
                 "point x=" + std::to_string(pts[i]));
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "P3 exact pipeline (u, nu_k, j_k, structure residuals <= 1e-12)"},
      {2, "potential identities on a 16^2 grid with mixed data (<= 1e-8 scale)"},
      {3, "reconstruction = 2 +- 1e-6, occupation identity, <l_a,1> = 2"},
      {4, "refinement study: bl and capacity trends, |nu|(E) -> 1"},
      {5, "smooth-data TV decay: nonincreasing, zero at k >= sup u"},
      {6, "AAB conditions: identity residuals <= 1e-9, Phi-energy -> 0"},
      {7, "Monte Carlo: Revuz/Dynkin 3 sigma, determinism, 20-seed battery"},
      {8, "obstacle approximants: bounds, monotone in n, reduite"},
      {9, "semilinear uniqueness witness and comparison"},
      {10, "fractional cross-validation: lattice vs Riesz quadrature, 2%"},
  };
  const double limits[10] = {0.1, 1.0, 1.0, 30.0, 0.0, 0.0, 10.0, 0.0, 0.0, 5.0};
  const std::function<void(Criterion&)> runners[10] = {
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Criterion& c = criteria[i];
    c.runtime_limit = limits[i];
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      runners[i](c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    c.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.runtime_limit > 0.0 && c.runtime_seconds > c.runtime_limit) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "runtime %.2fs exceeds %.1fs limit",
                    c.runtime_seconds, c.runtime_limit);
      c.failures.push_back(buf);
    }
    const bool ok = c.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("[%s] criterion %2d: %s (%.3fs)\n", ok ? "PASS" : "FAIL", c.id,
                c.name.c_str(), c.runtime_seconds);
    for (const std::string& f : c.failures) {
      std::printf("         - %s\n", f.c_str());
    }
  }
  return failed;
}
