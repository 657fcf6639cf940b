#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "renormlab/form.hpp"
#include "renormlab/green.hpp"
#include "renormlab/measure.hpp"

namespace renormlab {

/// Nodewise clamp T_k(u) = (u ^ k) v (-k); k must be >= 0.
std::vector<double> truncate(std::span<const double> u, double k);

/// Plateau difference Phi_k(u) = T_{k+1}(u) - T_k(u).
std::vector<double> plateau(std::span<const double> u, double k);

/// Truncation measure nu_k = L T_k(u) - masses(mu_d); by construction the
/// weak identity E(T_k(u), eta) = <mu_d, eta> + <nu_k, eta> holds for every
/// eta.
SignedMeasure extract_nu(const DiscreteForm& form, std::span<const double> u,
                         const SignedMeasure& mu_d, double k);

/// Jump part of the Tanaka-Meyer level measure at `level`:
///   j_a(u)(x) = sum_y 2J(x,y) (|u(y)-a| - |u(x)-a| - sign(u(x)-a)(u(y)-u(x)))
///             + kappa(x) (1_{u(x)>a}(|a|+a) + 1_{u(x)<=a}(|a|-a)),
/// with sign(0) = -1. Nonnegative entrywise (each summand is a convexity gap).
SignedMeasure jump_lambda(const DiscreteForm& form, std::span<const double> u,
                          double level);

/// Per-level Tanaka-Meyer ledger; on pure-jump lattices the local part is
/// identically zero, so lambda_a = j_a.
struct LambdaFamily {
  std::vector<double> levels;
  std::vector<SignedMeasure> jump_parts;
};
LambdaFamily lambda_family(const DiscreteForm& form, std::span<const double> u,
                           std::span<const double> levels);

/// TV residuals of the structure identities at level k > 0 on a pure-jump
/// lattice (the measure mu must satisfy L u = masses(mu)):
///   corollary:       nu_k  vs  -1_{u>k or u<=-k} mu_d + (j_k - j_{-k}) / 2
///   positive_part:   L(u+ ^ k)  vs  1_{0<u<=k} mu_d + j_k/2 - j_0/2
///   negative_part:   L(u- ^ k)  vs  -1_{-k<u<=0} mu_d + j_{-k}/2 - j_0/2
struct StructureResiduals {
  double corollary = 0.0;
  double positive_part = 0.0;
  double negative_part = 0.0;
  double scale = 1.0;
};
StructureResiduals structure_check(const DiscreteForm& form,
                                   std::span<const double> u,
                                   const SignedMeasure& mu, double k);

struct TruncationRecord {
  double k = 0.0;
  SignedMeasure nu;
  double tv = 0.0;
  double bl_to_mu_c = 0.0;
  double bl_abs = 0.0;            // d(|nu_k|, |mu_c|)
  double half_lambda_total = 0.0; // <j_k/2, 1>
  StructureResiduals structure;
  double truncation_energy = 0.0; // E(T_k u, T_k u)
  double aab_energy = 0.0;        // E(u, Phi_k(u))
};

struct TruncationReport {
  std::string mesh_tag;
  std::vector<TruncationRecord> records;
};

/// Per-k record of nu_k, its TV norm, dictionary distances to the
/// concentrated part, structure residuals and truncation energies.
TruncationReport verify_renormalized(const DiscreteForm& form,
                                     std::span<const double> u,
                                     const SignedMeasure& mu,
                                     std::span<const double> k_schedule,
                                     const TestDictionary& dict,
                                     std::string mesh_tag = "");

struct RefinementSpec {
  enum class Kind { local2d, local1d, fractional1d };
  Kind kind = Kind::local2d;
  double extent_lo = 0.0;
  double extent_hi = 1.0;
  std::vector<int> n_values;  // interior nodes per side / cells, one per mesh
  double alpha = 0.5;         // fractional only
  double constant = 1.0;      // fractional only
  double theta = 0.5;         // k_h = theta * sup u_h
  int tents_per_side = 5;
};

struct RefinementRow {
  double h = 0.0;
  int nodes = 0;
  double sup_u = 0.0;
  double k = 0.0;
  double nu_tv = 0.0;
  double bl_to_atoms = 0.0;
  double atom_capacity = 0.0;
};

struct RefinementReport {
  std::vector<RefinementRow> rows;
  bool bl_monotone = false;       // nonincreasing within the slack factor
  bool capacity_monotone = false; // strictly decreasing within the slack factor
  double slack = 0.10;
};

/// Joint mesh/truncation refinement study for concentrated atoms. Requires a
/// setting where point capacity vanishes under refinement: 2D local, or 1D
/// fractional with alpha <= 1/2. Other settings are refused with ConfigError.
RefinementReport refinement_study(const RefinementSpec& spec,
                                  std::span<const Atom> atoms);

struct AabIdentityRow {
  std::string h_name;
  std::string eta_name;
  double residual = 0.0; // |E(u, h(u) eta) - <mu, h(u) eta>|
  double scale = 1.0;
};

struct AabReport {
  std::vector<AabIdentityRow> identities;
  std::vector<double> k_levels;
  std::vector<double> phi_energies; // E(u, Phi_k(u)) along the schedule
  double max_relative_residual = 0.0;
  bool phi_nonincreasing = false;
  double phi_final = 0.0;
};

/// Renormalisation conditions for smooth data: the extended-form identity
/// E(u, h(u) eta) = <mu, h(u) eta> over the h x eta dictionaries and the decay
/// of E(u, Phi_k(u)) along the schedule. Refuses measures with a concentrated
/// part.
AabReport verify_aab(const DiscreteForm& form, std::span<const double> u,
                     const SignedMeasure& mu,
                     std::span<const CompactFunction> h_dictionary,
                     const TestDictionary& etas,
                     std::span<const double> k_schedule);

/// Default compactly supported h dictionary scaled to cover [-bound, bound].
std::vector<CompactFunction> standard_h_dictionary(double bound);

struct SemilinearConfig {
  double damping = 0.5;
  double tolerance = 1e-8; // relative residual target
  int max_iterations = 1000;
};

/// Damped fixed-point iteration for -Au = f(.,u) + mu with f nonincreasing in
/// the second argument: u <- (1-lambda) u + lambda G(masses(mu) + M f(.,u)),
/// halving lambda when the residual fails to decrease.
std::vector<double> solve_semilinear(const GreenOperator& green,
                                     const std::function<double(int, double)>& f,
                                     const SignedMeasure& mu,
                                     std::span<const double> initial_guess = {},
                                     SemilinearConfig config = {});

}  // namespace renormlab
