#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "renormlab/form.hpp"
#include "renormlab/green.hpp"
#include "renormlab/measure.hpp"

namespace renormlab {

/// Counter-based 64-bit generator (splitmix64). Streams are split by hashing
/// (seed, path index), so estimates are independent of execution order.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static std::uint64_t mix(std::uint64_t z);
  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double next_double();
  /// Stream key for path `index` under `seed`.
  static std::uint64_t path_key(std::uint64_t seed, std::uint64_t index);

private:
  std::uint64_t state_;
};

struct McConfig {
  long n_paths = 10000;
  std::uint64_t seed = 0;
  int start_node = 0;
  std::vector<double> start_distribution; // optional; overrides start_node
  double max_time = 1e9;
  std::string rng_name = "splitmix64"; // pinned algorithm metadata
};

struct McEstimate {
  std::string name;
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
  long n_capped = 0;       // paths that hit max_time
  double reference = 0.0;  // exact value when checking an identity
  bool has_reference = false;

  double residual() const { return has_reference ? mean - reference : 0.0; }
  /// |mean - reference| <= n_sigma * stderr (degenerate stderr counts as
  /// insufficient sampling, not failure, when n <= 1).
  bool within(double n_sigma = 3.0) const;
};

/// Path functionals of the killed chain with jump rate 2J(x,y)/m(x) and
/// killing rate kappa(x)/m(x).
struct Functional {
  enum class Kind {
    occupation,          // integral of f(X_s) ds over the lifetime
    weighted_atom_time,  // integral of eta(X_s) dA^mu_s
    exit_value,          // u(X_tau), tau = first exit of {|u| < level}
    optional_stopping,   // u(X_tau) + A^mu_tau
    lifetime             // zeta
  };
  Kind kind = Kind::lifetime;
  std::string name;
  std::vector<double> weight;         // f or eta; empty means identically 1
  std::vector<double> measure_masses; // masses of mu for A^mu kinds
  std::vector<double> region_u;       // u defining the exit region
  double level = 0.0;
};

/// Simulates the continuous-time chain and returns one estimate per
/// functional. Deterministic given (seed, n_paths, form, functionals):
/// per-path streams plus fixed-tree pairwise aggregation.
std::vector<McEstimate> simulate(const DiscreteForm& form, const McConfig& config,
                                 std::span<const Functional> functionals);

/// Revuz identity: MC estimate of E_x integral of eta(X_t) dA^mu_t against
/// the exact potential G(eta . mu)(x).
McEstimate revuz_check(const DiscreteForm& form, const GreenOperator& green,
                       const SignedMeasure& mu, std::span<const double> eta,
                       int start, const McConfig& config);

struct DynkinResult {
  McEstimate optional_stopping; // E[u(X_tau)] + E[A^{mu_d}_tau] vs u(x)
  McEstimate exit_value;        // E[u(X_tau)] vs (G mu_c)(x), trend only
};

/// Optional-stopping identity at the exit of {|u| < k} plus the recorded
/// trend value E_x u(X_tau_k) against the concentrated potential.
DynkinResult dynkin_check(const DiscreteForm& form, const GreenOperator& green,
                          std::span<const double> u, const SignedMeasure& mu,
                          double k, int start, const McConfig& config);

struct HoldingTimeRow {
  int node = 0;
  double expected_mean = 0.0;
  double empirical_mean = 0.0;
  double std_error = 0.0;
  long visits = 0;
};

/// Calibration of the exponential holding times: empirical mean per node vs
/// m(x) / (sum_y 2J(x,y) + kappa(x)).
std::vector<HoldingTimeRow> calibrate_holding_times(const DiscreteForm& form,
                                                    const McConfig& config);

struct BatteryResult {
  int n_seeds = 0;
  int n_passed = 0;
  double pass_rate() const { return n_seeds ? double(n_passed) / n_seeds : 0.0; }
};

/// Repeats the Revuz and Dynkin identity checks over independent seeds
/// (seed, seed+1, ...); a seed passes when all its checks sit inside 3 sigma.
BatteryResult identity_battery(const DiscreteForm& form, const GreenOperator& green,
                               const SignedMeasure& mu, std::span<const double> u,
                               double k, int start, const McConfig& config,
                               int n_seeds);

}  // namespace renormlab
