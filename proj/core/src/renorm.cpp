#include "renormlab/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "renormlab/errors.hpp"

namespace renormlab {

namespace {

// sign(0) = -1 throughout.
inline double sign_minus(double s) { return s > 0.0 ? 1.0 : -1.0; }

// Convexity gap of |.-a| between values s (here) and t (there); nonnegative.
inline double convexity_gap(double s, double t, double a) {
  return std::abs(t - a) - std::abs(s - a) - sign_minus(s - a) * (t - s);
}

// Killing contribution equals the gap against the cemetery value 0.
inline double killing_gap(double s, double a) { return convexity_gap(s, 0.0, a); }

inline double sup_norm(std::span<const double> u) {
  double s = 0.0;
  for (double x : u) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

std::vector<double> truncate(std::span<const double> u, double k) {
  if (k < 0.0) throw ConfigError("truncation level must be >= 0");
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::clamp(u[i], -k, k);
  return out;
}

std::vector<double> plateau(std::span<const double> u, double k) {
  if (k < 0.0) throw ConfigError("plateau level must be >= 0");
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = std::clamp(u[i], -(k + 1.0), k + 1.0) - std::clamp(u[i], -k, k);
  }
  return out;
}

SignedMeasure extract_nu(const DiscreteForm& form, std::span<const double> u,
                         const SignedMeasure& mu_d, double k) {
  if (mu_d.size() != form.size()) throw ConfigError("extract_nu: size mismatch");
  const std::vector<double> tk = truncate(u, k);
  std::vector<double> masses = form.apply_stiffness(tk);
  for (int x = 0; x < form.size(); ++x) masses[x] -= mu_d.mass(x);
  return SignedMeasure::from_masses(std::move(masses), MassTag::untagged);
}

SignedMeasure jump_lambda(const DiscreteForm& form, std::span<const double> u,
                          double level) {
  if (static_cast<int>(u.size()) != form.size()) {
    throw ConfigError("jump_lambda: size mismatch");
  }
  SignedMeasure out(form.size());
  for (int x = 0; x < form.size(); ++x) {
    double acc = 0.0;
    for (const DiscreteForm::Neighbor& nb : form.neighbors(x)) {
      acc += 2.0 * nb.j * convexity_gap(u[x], u[nb.node], level);
    }
    acc += form.kappa(x) * killing_gap(u[x], level);
    if (acc != 0.0) out.set(x, acc, MassTag::untagged);
  }
  return out;
}

LambdaFamily lambda_family(const DiscreteForm& form, std::span<const double> u,
                           std::span<const double> levels) {
  LambdaFamily fam;
  fam.levels.assign(levels.begin(), levels.end());
  fam.jump_parts.reserve(levels.size());
  for (double a : levels) fam.jump_parts.push_back(jump_lambda(form, u, a));
  return fam;
}

StructureResiduals structure_check(const DiscreteForm& form,
                                   std::span<const double> u,
                                   const SignedMeasure& mu, double k) {
  if (!(k > 0.0)) throw ConfigError("structure_check: level k must be > 0");
  const int n = form.size();
  auto [mu_d, mu_c] = mu.decompose();

  const SignedMeasure j_pos = jump_lambda(form, u, k);
  const SignedMeasure j_neg = jump_lambda(form, u, -k);
  const SignedMeasure j_zero = jump_lambda(form, u, 0.0);

  StructureResiduals out;
  out.scale = std::max({1.0, mu.tv_norm(), j_pos.tv_norm(), j_zero.tv_norm()});

  // Corollary: nu_k = -1_{|u| "outside" (-k,k]} mu_d + (j_k - j_{-k})/2.
  const SignedMeasure nu = extract_nu(form, u, mu_d, k);
  double res_cor = 0.0;
  for (int x = 0; x < n; ++x) {
    const bool outside = u[x] > k || u[x] <= -k;
    const double expect =
        (outside ? -mu_d.mass(x) : 0.0) + 0.5 * (j_pos.mass(x) - j_neg.mass(x));
    res_cor += std::abs(nu.mass(x) - expect);
  }
  out.corollary = res_cor;

  // Positive part: L(u+ ^ k) = 1_{0<u<=k} mu_d + j_k/2 - j_0/2.
  std::vector<double> upk(n), unk(n);
  for (int x = 0; x < n; ++x) {
    upk[x] = std::min(std::max(u[x], 0.0), k);
    unk[x] = std::min(std::max(-u[x], 0.0), k);
  }
  const std::vector<double> l_upk = form.apply_stiffness(upk);
  const std::vector<double> l_unk = form.apply_stiffness(unk);
  double res_pos = 0.0, res_neg = 0.0;
  for (int x = 0; x < n; ++x) {
    const double ind_pos = (u[x] > 0.0 && u[x] <= k) ? mu_d.mass(x) : 0.0;
    res_pos += std::abs(l_upk[x] - (ind_pos + 0.5 * (j_pos.mass(x) - j_zero.mass(x))));
    const double ind_neg = (u[x] > -k && u[x] <= 0.0) ? -mu_d.mass(x) : 0.0;
    res_neg += std::abs(l_unk[x] - (ind_neg + 0.5 * (j_neg.mass(x) - j_zero.mass(x))));
  }
  out.positive_part = res_pos;
  out.negative_part = res_neg;
  return out;
}

TruncationReport verify_renormalized(const DiscreteForm& form,
                                     std::span<const double> u,
                                     const SignedMeasure& mu,
                                     std::span<const double> k_schedule,
                                     const TestDictionary& dict,
                                     std::string mesh_tag) {
  auto [mu_d, mu_c] = mu.decompose();
  const SignedMeasure mu_c_abs = mu_c.absolute();

  TruncationReport report;
  report.mesh_tag = std::move(mesh_tag);
  report.records.reserve(k_schedule.size());
  for (double k : k_schedule) {
    TruncationRecord rec;
    rec.k = k;
    rec.nu = extract_nu(form, u, mu_d, k);
    rec.tv = rec.nu.tv_norm();
    rec.bl_to_mu_c = bl_distance(rec.nu, mu_c, form.space(), dict);
    rec.bl_abs = bl_distance(rec.nu.absolute(), mu_c_abs, form.space(), dict);
    rec.half_lambda_total = 0.5 * jump_lambda(form, u, k).total();
    rec.structure = structure_check(form, u, mu, k);
    const std::vector<double> tk = truncate(u, k);
    rec.truncation_energy = form.energy(tk, tk);
    const std::vector<double> phi = plateau(u, k);
    rec.aab_energy = form.energy(u, phi);
    report.records.push_back(std::move(rec));
  }
  return report;
}

RefinementReport refinement_study(const RefinementSpec& spec,
                                  std::span<const Atom> atoms) {
  if (spec.n_values.empty()) throw ConfigError("refinement study needs meshes");
  if (!(spec.theta > 0.0) || !(spec.theta < 1.0)) {
    throw ConfigError("k-schedule factor theta must lie in (0,1)");
  }
  bool has_concentrated = false;
  for (const Atom& a : atoms) {
    if (a.tag == MassTag::concentrated && a.mass != 0.0) has_concentrated = true;
  }
  if (has_concentrated) {
    if (spec.kind == RefinementSpec::Kind::local1d) {
      throw ConfigError(
          "refinement study refused: points keep positive capacity on 1D local "
          "grids, so a concentrated atom cannot be validated there; use a 2D "
          "grid or a 1D fractional form with alpha <= 1/2");
    }
    if (spec.kind == RefinementSpec::Kind::fractional1d && spec.alpha > 0.5) {
      throw ConfigError(
          "refinement study refused: 1D fractional point capacity vanishes "
          "only for alpha <= 1/2, got alpha = " +
          std::to_string(spec.alpha));
    }
  }

  RefinementReport report;
  for (int n : spec.n_values) {
    DiscreteForm form = [&] {
      switch (spec.kind) {
        case RefinementSpec::Kind::local2d:
          return build_local_form({2, n, spec.extent_lo, spec.extent_hi, {}});
        case RefinementSpec::Kind::local1d:
          return build_local_form({1, n, spec.extent_lo, spec.extent_hi, {}});
        case RefinementSpec::Kind::fractional1d:
          return build_fractional_form(
              {n, spec.extent_lo, spec.extent_hi, spec.alpha, spec.constant});
      }
      throw ConfigError("unknown refinement kind");
    }();

    SignedMeasure mu(form.size());
    std::vector<int> atom_nodes;
    for (const Atom& a : atoms) {
      const int node = form.space().nearest_node(a.position);
      mu.add_atom(node, a.mass, a.tag);
      atom_nodes.push_back(node);
    }
    GreenOperator green(form);
    const std::vector<double> u = green.apply(mu);
    auto [mu_d, mu_c] = mu.decompose();

    RefinementRow row;
    row.h = form.space().spacing();
    row.nodes = form.size();
    row.sup_u = sup_norm(u);
    row.k = spec.theta * row.sup_u;
    const SignedMeasure nu = extract_nu(form, u, mu_d, row.k);
    row.nu_tv = nu.tv_norm();

    std::vector<Point> centers;
    for (const Atom& a : atoms) centers.push_back(a.position);
    const TestDictionary dict =
        TestDictionary::standard(form.space(), centers, spec.tents_per_side);
    row.bl_to_atoms = bl_distance_to_atoms(nu, form.space(), atoms, dict);
    row.atom_capacity = capacity(green, atom_nodes).capacity;
    report.rows.push_back(row);
  }

  auto monotone = [&](auto field) {
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
      if (field(report.rows[i]) > field(report.rows[i - 1]) * (1.0 + report.slack)) {
        return false;
      }
    }
    return true;
  };
  report.bl_monotone = monotone([](const RefinementRow& r) { return r.bl_to_atoms; });
  report.capacity_monotone =
      monotone([](const RefinementRow& r) { return r.atom_capacity; });
  return report;
}

std::vector<CompactFunction> standard_h_dictionary(double bound) {
  if (!(bound > 0.0)) throw ConfigError("h dictionary bound must be positive");
  std::vector<CompactFunction> dict;
  const double m1 = bound;
  dict.push_back({[m1](double s) { return std::abs(s) <= m1 ? 1.0 : 0.0; },
                  m1, "box"});
  const double m2 = 1.5 * bound;
  dict.push_back({[m2](double s) {
                    const double a = std::abs(s);
                    if (a >= m2) return 0.0;
                    const double knee = 0.5 * m2;
                    return a <= knee ? 1.0 : (m2 - a) / (m2 - knee);
                  },
                  m2, "trapezoid"});
  const double m3 = 2.0 * bound;
  dict.push_back({[m3](double s) {
                    const double t = s / m3;
                    if (std::abs(t) >= 1.0) return 0.0;
                    const double w = 1.0 - t * t;
                    return w * w;
                  },
                  m3, "bump"});
  return dict;
}

AabReport verify_aab(const DiscreteForm& form, std::span<const double> u,
                     const SignedMeasure& mu,
                     std::span<const CompactFunction> h_dictionary,
                     const TestDictionary& etas,
                     std::span<const double> k_schedule) {
  auto [mu_d, mu_c] = mu.decompose();
  if (mu_c.tv_norm() != 0.0) {
    throw ConfigError(
        "verify_aab refused: the smooth-data renormalisation conditions "
        "require an all-diffuse measure, but a concentrated part is present");
  }
  if (h_dictionary.empty()) throw ConfigError("verify_aab: empty h dictionary");

  AabReport report;
  for (const CompactFunction& h : h_dictionary) {
    for (int e = 0; e < etas.size(); ++e) {
      const std::vector<double> eta = etas.on_nodes(e, form.space());
      const double lhs = form.extended_energy(u, h, eta);
      double rhs = 0.0;
      for (int x = 0; x < form.size(); ++x) {
        rhs += mu.mass(x) * h.fn(u[x]) * eta[x];
      }
      AabIdentityRow row;
      row.h_name = h.name;
      row.eta_name = etas.member(e).name;
      row.residual = std::abs(lhs - rhs);
      row.scale = std::max({1.0, std::abs(lhs), std::abs(rhs), mu.tv_norm()});
      report.max_relative_residual =
          std::max(report.max_relative_residual, row.residual / row.scale);
      report.identities.push_back(std::move(row));
    }
  }

  report.k_levels.assign(k_schedule.begin(), k_schedule.end());
  report.phi_energies.reserve(k_schedule.size());
  for (double k : k_schedule) {
    const std::vector<double> phi = plateau(u, k);
    report.phi_energies.push_back(form.energy(u, phi));
  }
  report.phi_nonincreasing = true;
  for (std::size_t i = 1; i < report.phi_energies.size(); ++i) {
    if (report.phi_energies[i] > report.phi_energies[i - 1] + 1e-12) {
      report.phi_nonincreasing = false;
    }
  }
  report.phi_final = report.phi_energies.empty() ? 0.0 : report.phi_energies.back();
  return report;
}

std::vector<double> solve_semilinear(const GreenOperator& green,
                                     const std::function<double(int, double)>& f,
                                     const SignedMeasure& mu,
                                     std::span<const double> initial_guess,
                                     SemilinearConfig config) {
  const DiscreteForm& form = green.form();
  const int n = form.size();
  if (mu.size() != n) throw ConfigError("solve_semilinear: measure size mismatch");

  std::vector<double> u(n, 0.0);
  if (!initial_guess.empty()) {
    if (static_cast<int>(initial_guess.size()) != n) {
      throw ConfigError("solve_semilinear: initial guess size mismatch");
    }
    u.assign(initial_guess.begin(), initial_guess.end());
  }

  const double scale = std::max(1.0, mu.tv_norm());
  auto residual_norm = [&](const std::vector<double>& v) {
    const std::vector<double> lv = form.apply_stiffness(v);
    double acc = 0.0;
    for (int x = 0; x < n; ++x) {
      const double r = lv[x] - form.space().volume(x) * f(x, v[x]) - mu.mass(x);
      acc += r * r;
    }
    return std::sqrt(acc);
  };

  double res = residual_norm(u);
  double lambda = config.damping;
  std::vector<double> rhs(n), picard, candidate(n);
  for (int it = 0; it < config.max_iterations; ++it) {
    if (res <= config.tolerance * scale) return u;
    for (int x = 0; x < n; ++x) {
      rhs[x] = mu.mass(x) + form.space().volume(x) * f(x, u[x]);
    }
    picard = green.solve(rhs);
    // Residual-based step acceptance: halve the damping until it decreases.
    double step = lambda;
    bool accepted = false;
    for (int cut = 0; cut < 40; ++cut) {
      for (int x = 0; x < n; ++x) {
        candidate[x] = (1.0 - step) * u[x] + step * picard[x];
      }
      const double cand_res = residual_norm(candidate);
      if (cand_res < res) {
        u.swap(candidate);
        res = cand_res;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (res <= config.tolerance * scale) return u;
      throw SolverError("solve_semilinear: no descent step found (residual " +
                        std::to_string(res) + ")");
    }
  }
  if (res <= config.tolerance * scale) return u;
  throw SolverError("solve_semilinear: divergence after " +
                    std::to_string(config.max_iterations) +
                    " iterations (residual " + std::to_string(res) + ")");
}

}  // namespace renormlab
