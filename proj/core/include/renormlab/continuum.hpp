#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "renormlab/state_space.hpp"

namespace renormlab {

struct QuadratureConfig {
  int radial_nodes = 512;  // panels per unit of the integration variable
  double tolerance = 1e-6;
};

/// Closed-form 2D log potential u(x) = (1/2pi) log(1/|x|) with -Au = delta_0
/// and carre-du-champ density 2|grad u|^2 = 2/(2 pi r)^2. Level sets are the
/// circles r_a = exp(-2 pi a).
class LogPotential2d {
public:
  explicit LogPotential2d(QuadratureConfig quad = {}) : quad_(quad) {}

  double value(double r) const;
  double level_radius(double a) const;

  /// (1/(c-b)) * integral over {b <= u <= c} of eta * 2|grad u|^2 dm,
  /// by quadrature in the level variable. Equals 2 eta(0) for eta radial
  /// and continuous at 0, independently of the pair (b, c).
  double reconstruction(double b, double c,
                        const std::function<double(double)>& eta_radial) const;

  /// <l_a, eta> = line integral over {u = a} of eta * 2|grad u| dsigma,
  /// computed by angular quadrature. Equals 2 eta(r_a) analytically.
  double local_time_mass(double a,
                         const std::function<double(double)>& eta_radial) const;

  struct OccupationResult {
    double lhs = 0.0; // integral of <l_a, eta> phi(a) da (coarea route)
    double rhs = 0.0; // <mu^c_<u>, phi(u) eta> (area quadrature route)
  };

  /// Occupation-time identity for a level profile phi supported in
  /// [support_lo, support_hi] subset (0, infinity).
  OccupationResult occupation(const std::function<double(double)>& phi,
                              double support_lo, double support_hi,
                              const std::function<double(double)>& eta_radial) const;

private:
  QuadratureConfig quad_;
};

/// Bounded measurable profile on the line used by the Riesz quadrature:
/// evaluated everywhere, with optional breakpoints (quadrature panel splits)
/// and an optional compact support outside of which it vanishes exactly.
struct Profile1d {
  std::function<double(double)> fn;
  std::vector<double> breakpoints;
  bool zero_outside = false;
  double support_lo = 0.0;
  double support_hi = 0.0;
};

/// Piecewise-linear interpolation of lattice node values, linear down to 0 at
/// the interval ends and zero outside [lo, hi].
Profile1d lattice_profile(const StateSpace& space, std::span<const double> u,
                          double lo, double hi);

struct Riesz1dExample {
  double alpha = 0.5;
  double constant = 1.0;
  QuadratureConfig quad;
};

/// Continuum jump-measure density at the evaluation points:
///   2 c * integral over R of
///     (|u(y)-k| - |u(x)-k| - sign(u(x)-k)(u(y)-u(x))) / |x-y|^{1+2a} dy,
/// with sign(0) = -1. Comparable directly with the lattice jump_lambda
/// density (mass divided by m). Throws SolverError when the tail fails the
/// decay probe.
std::vector<double> riesz_jk_quadrature(const Riesz1dExample& ex,
                                        const Profile1d& u, double k,
                                        std::span<const double> eval_points);

}  // namespace renormlab
