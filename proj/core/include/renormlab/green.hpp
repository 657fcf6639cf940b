#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "renormlab/form.hpp"
#include "renormlab/measure.hpp"

namespace renormlab {

/// Factorised solve handle for the stiffness operator L: applies G = L^{-1}
/// against mass vectors and the resolvents R_alpha = (alpha M + L)^{-1} M.
///
/// Direct (sparse Cholesky) below `direct_threshold` nodes, conjugate
/// gradients above it. Every solve enforces the relative residual bound
/// ||L u - b|| <= tolerance ||b||; failures throw SolverError with the
/// achieved residual. Immutable after construction and shareable across
/// threads for concurrent solves.
class GreenOperator {
public:
  struct Config {
    double tolerance = 1e-10;
    int direct_threshold = 5000;
    int max_iterations = 20000;
  };

  explicit GreenOperator(const DiscreteForm& form);
  GreenOperator(const DiscreteForm& form, Config config);
  ~GreenOperator();
  GreenOperator(GreenOperator&&) noexcept;
  GreenOperator& operator=(GreenOperator&&) noexcept;

  const DiscreteForm& form() const { return *form_; }
  double tolerance() const { return config_.tolerance; }
  bool uses_direct_solver() const;

  /// u with L u = masses(mu): the integral solution u = G mu.
  std::vector<double> apply(const SignedMeasure& mu) const;

  /// u with L u = b for a raw mass vector b.
  std::vector<double> solve(std::span<const double> b) const;

  /// v with (alpha M + L) v = M f, M = diag(m); at alpha = 0 this is R f.
  std::vector<double> resolvent(double alpha, std::span<const double> f) const;

private:
  const DiscreteForm* form_;
  Config config_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct CapacityResult {
  double capacity = 0.0;
  std::vector<double> equilibrium_potential;
};

/// cap(B) = inf { E(u,u) : u = 1 on B } and its minimiser: L e = 0 off B with
/// e = 1 on B. Empty B gives capacity 0; B = all nodes gives sum(kappa).
CapacityResult capacity(const GreenOperator& green, std::span<const int> nodes);

struct ExcessiveCheck {
  bool excessive = false;
  int witness = -1;       // most-violating node when not excessive
  double violation = 0.0; // most negative of min(u, Lu), 0 if excessive
};

/// Discrete excessivity criterion: u >= -tol and (Lu) >= -tol nodewise.
ExcessiveCheck is_excessive(const DiscreteForm& form, std::span<const double> u,
                            double tol = 1e-12);

struct ObstacleConfig {
  double relaxation = 1.5;
  double tolerance = 1e-12;
  long max_sweeps = 200000;
};

/// Smallest excessive-type majorant with running cost n*g: the unique v with
/// v >= h, Lv + n M g >= 0 and (v - h)(Lv + n M g) = 0 nodewise, computed by
/// projected successive over-relaxation. The mirrored minorant is
/// -excessive_majorant(G, -h, n, g).
std::vector<double> excessive_majorant(const GreenOperator& green,
                                       std::span<const double> h, double penalty,
                                       std::span<const double> g,
                                       ObstacleConfig config = {});

struct PotentialIdentityRow {
  std::string eta_name;
  double duality_residual = 0.0;   // |<u, eta m> - <mu, R eta>|
  double very_weak_residual = 0.0; // |<u, -A eta>_m - <mu, eta>|
  double scale = 1.0;
};

struct PotentialIdentityReport {
  std::vector<PotentialIdentityRow> rows;
  double max_relative_residual = 0.0;
};

/// Checks the duality pairing <u, eta>_m = <mu, R eta> and the very weak form
/// <u, -A eta>_m = <mu, eta> for u = G mu against every test function given.
PotentialIdentityReport verify_potential_identities(
    const GreenOperator& green, const SignedMeasure& mu,
    const std::vector<std::pair<std::string, std::vector<double>>>& etas);

/// Inverse power iteration estimate of the smallest eigenvalue of L.
double smallest_eigenvalue(const GreenOperator& green, int iterations = 200);

}  // namespace renormlab
