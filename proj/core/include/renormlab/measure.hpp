#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "renormlab/state_space.hpp"

namespace renormlab {

/// Capacity class of an atom: diffuse (smooth) or concentrated.
/// Untagged is allowed for zero entries and for derived measures that are
/// never decomposed.
enum class MassTag : std::uint8_t { untagged = 0, diffuse = 1, concentrated = 2 };

const char* to_string(MassTag tag);
MassTag mass_tag_from_string(const std::string& s);

/// A bounded signed measure on the state space, stored pre-integrated:
/// masses(x) already includes the volume weight, so <mu, eta> = sum eta(x) masses(x)
/// and the equation reads L u = masses without further m-weighting.
class SignedMeasure {
public:
  SignedMeasure() : SignedMeasure(0) {}
  explicit SignedMeasure(int n);
  SignedMeasure(std::vector<double> masses, std::vector<MassTag> tags);
  static SignedMeasure zero(int n) { return SignedMeasure(n); }
  static SignedMeasure from_masses(std::vector<double> masses, MassTag tag);
  /// masses(x) = f(position(x)) * m(x).
  static SignedMeasure from_density(const StateSpace& space,
                                    const std::function<double(const Point&)>& f,
                                    MassTag tag = MassTag::diffuse);

  int size() const { return static_cast<int>(masses_.size()); }
  double mass(int i) const { return masses_[i]; }
  const std::vector<double>& masses() const { return masses_; }
  MassTag tag(int i) const { return tags_[i]; }

  void set(int i, double mass, MassTag tag);
  void add_atom(int node, double mass, MassTag tag);

  double tv_norm() const;
  double total() const;
  double pair(std::span<const double> eta) const;

  /// Splits by tag into (diffuse, concentrated); throws ConfigError on an
  /// untagged nonzero entry. The parts sum to *this exactly.
  std::pair<SignedMeasure, SignedMeasure> decompose() const;

  SignedMeasure positive_part() const;
  SignedMeasure negative_part() const;
  SignedMeasure absolute() const;

  SignedMeasure& operator+=(const SignedMeasure& other);
  SignedMeasure& operator-=(const SignedMeasure& other);
  SignedMeasure& operator*=(double factor);
  friend SignedMeasure operator+(SignedMeasure a, const SignedMeasure& b) { return a += b; }
  friend SignedMeasure operator-(SignedMeasure a, const SignedMeasure& b) { return a -= b; }
  friend SignedMeasure operator*(double factor, SignedMeasure a) { return a *= factor; }

private:
  std::vector<double> masses_;
  std::vector<MassTag> tags_;
};

/// Abstract atom used for mesh-independent comparisons in refinement studies.
struct Atom {
  Point position{0.0, 0.0};
  double mass = 0.0;
  MassTag tag = MassTag::untagged;
};

/// Finite dictionary of test functions with sup norm <= 1 and Lipschitz
/// constant <= 1 with respect to node positions. Stands in for C_b(E) in
/// narrow-convergence checks; bounds are validated at construction.
class TestDictionary {
public:
  struct Member {
    std::string name;
    std::function<double(const Point&)> fn;
  };

  TestDictionary(std::vector<Member> members, const StateSpace& space,
                 std::span<const Point> extra_check_points = {});

  /// Constant 1, per-coordinate clamped bumps, tents (slope 1) on a coarse
  /// sub-grid of the bounding box, plus tents at the given extra centers.
  static TestDictionary standard(const StateSpace& space,
                                 std::vector<Point> extra_tent_centers = {},
                                 int tents_per_side = 5);

  int size() const { return static_cast<int>(members_.size()); }
  const Member& member(int i) const { return members_[i]; }
  double evaluate(int i, const Point& p) const { return members_[i].fn(p); }
  /// Member i sampled on all nodes.
  std::vector<double> on_nodes(int i, const StateSpace& space) const;

private:
  std::vector<Member> members_;
};

/// max over the dictionary of |<mu - nu, eta>| for measures on one space.
double bl_distance(const SignedMeasure& mu, const SignedMeasure& nu,
                   const StateSpace& space, const TestDictionary& dict);

/// Same, with nu given as abstract atoms (positions need not be nodes).
double bl_distance_to_atoms(const SignedMeasure& mu, const StateSpace& space,
                            std::span<const Atom> atoms,
                            const TestDictionary& dict);

}  // namespace renormlab
