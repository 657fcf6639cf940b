#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "renormlab/measure.hpp"
#include "renormlab/state_space.hpp"

namespace renormlab {

/// Scalar function h with a declared compact support: h(s) = 0 for
/// |s| > support_bound. The bound is part of the value and is required by
/// extended_energy.
struct CompactFunction {
  std::function<double(double)> fn;
  double support_bound = 0.0;
  std::string name;
  double operator()(double s) const { return fn(s); }
};

/// Finite-state symmetric Dirichlet form: the Beurling-Deny ledger of jump
/// intensities J (per ordered pair, symmetric, zero diagonal), killing
/// intensities kappa, and per-edge local-proxy flags.
///
/// Conventions: the energy sums over ordered pairs with no 1/2 factor,
///   E(u,v) = sum_{x,y} J(x,y)(u(x)-u(y))(v(x)-v(y)) + sum_x kappa(x)u(x)v(x),
/// so the stiffness operator is (Lu)(x) = sum_y 2J(x,y)(u(x)-u(y)) + kappa(x)u(x)
/// and E(u,v) = u^T L v. A graph conductance c_xy maps to J(x,y) = c_xy / 2.
class DiscreteForm {
public:
  struct EdgeSpec {
    int a = 0;
    int b = 0;
    double j = 0.0;  // J(a,b) = J(b,a), one entry per unordered pair
    bool local = false;
  };

  struct Neighbor {
    int node;
    double j;
    bool local;
  };

  DiscreteForm(StateSpace space, std::vector<EdgeSpec> edges,
               std::vector<double> kappa, std::string descriptor = "");

  const StateSpace& space() const { return space_; }
  int size() const { return space_.size(); }
  const std::string& descriptor() const { return descriptor_; }

  double kappa(int x) const { return kappa_[x]; }
  const std::vector<double>& kappa() const { return kappa_; }

  /// Directed adjacency of node x (both orientations of every stored edge).
  std::span<const Neighbor> neighbors(int x) const {
    return {adjacency_.data() + offsets_[x],
            static_cast<std::size_t>(offsets_[x + 1] - offsets_[x])};
  }
  /// Number of stored unordered edges.
  int edge_count() const { return static_cast<int>(adjacency_.size() / 2); }

  /// (Lu)(x) = sum_y 2J(x,y)(u(x)-u(y)) + kappa(x)u(x).
  std::vector<double> apply_stiffness(std::span<const double> u) const;

  /// Full form E(u,v), equal to u^T L v.
  double energy(std::span<const double> u, std::span<const double> v) const;

  /// J-part of the energy restricted to local-flagged or non-local edges
  /// (no killing term).
  double energy_part(std::span<const double> u, std::span<const double> v,
                     bool local_part) const;

  /// sum_x kappa(x) u(x) v(x).
  double killing_energy(std::span<const double> u, std::span<const double> v) const;

  /// Energy measure (carre du champ) of u split into (local, jump) parts:
  /// each density is mu(x) = sum_y 2J(x,y)(u(x)-u(y))^2 over the respective
  /// edge class; kappa contributes to neither.
  std::pair<SignedMeasure, SignedMeasure> energy_measure(std::span<const double> u) const;

  /// Extended form E(u, h(u) eta): local term on T_M(u) with M the declared
  /// support bound of h, two symmetrized jump terms over non-local edges, and
  /// the killing term sum kappa u h(u) eta.
  double extended_energy(std::span<const double> u, const CompactFunction& h,
                         std::span<const double> eta) const;

  Eigen::SparseMatrix<double> stiffness_matrix() const;

  /// Debug dump: node list, J triplets, kappa, volumes (JSON text).
  std::string to_debug_json() const;

private:
  void check_dim(std::span<const double> u, const char* what) const;

  StateSpace space_;
  std::vector<int> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<double> kappa_;
  std::string descriptor_;
};

struct LocalGridSpec {
  int dim = 1;
  int n_per_side = 3;
  double extent_lo = 0.0;
  double extent_hi = 1.0;
  /// Conductance evaluated at edge midpoints; empty means a == 1.
  std::function<double(const Point&)> conductance;
};

/// Nearest-neighbour form with ordered-pair intensities J = a h^{d-2} / 2 and
/// boundary edges folded into the killing vector kappa.
DiscreteForm build_local_form(const LocalGridSpec& spec);

struct FractionalIntervalSpec {
  int n_nodes = 64;
  double extent_lo = 0.0;
  double extent_hi = 1.0;
  double alpha = 0.5;    // exponent in (0,1)
  double constant = 1.0; // kernel normalisation c
};

/// 1D fractional kernel form on cell-centred nodes: J = c h^2 / |x-y|^{1+2a}
/// beyond the grid scale, a nearest-neighbour local proxy for the sub-grid
/// singular range, and closed-form exterior killing.
DiscreteForm build_fractional_form(const FractionalIntervalSpec& spec);

/// Closed-form exterior killing intensity at position x inside [lo, hi]:
/// 2 c h * integral over the two exterior half-lines of |x-y|^{-1-2a} dy.
double fractional_killing(double x, double lo, double hi, double h, double alpha,
                          double c);

}  // namespace renormlab
