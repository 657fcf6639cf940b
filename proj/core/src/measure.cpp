#include "renormlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "renormlab/errors.hpp"

namespace renormlab {

const char* to_string(MassTag tag) {
  switch (tag) {
    case MassTag::diffuse: return "diffuse";
    case MassTag::concentrated: return "concentrated";
    default: return "untagged";
  }
}

MassTag mass_tag_from_string(const std::string& s) {
  if (s == "diffuse") return MassTag::diffuse;
  if (s == "concentrated") return MassTag::concentrated;
  if (s == "untagged") return MassTag::untagged;
  throw ConfigError("unknown mass tag '" + s + "'");
}

SignedMeasure::SignedMeasure(int n)
    : masses_(n, 0.0), tags_(n, MassTag::untagged) {
  if (n < 0) throw ConfigError("measure size must be nonnegative");
}

SignedMeasure::SignedMeasure(std::vector<double> masses, std::vector<MassTag> tags)
    : masses_(std::move(masses)), tags_(std::move(tags)) {
  if (masses_.size() != tags_.size()) {
    throw ConfigError("measure mass/tag size mismatch");
  }
}

SignedMeasure SignedMeasure::from_masses(std::vector<double> masses, MassTag tag) {
  std::vector<MassTag> tags(masses.size(), tag);
  return SignedMeasure(std::move(masses), std::move(tags));
}

SignedMeasure SignedMeasure::from_density(const StateSpace& space,
                                          const std::function<double(const Point&)>& f,
                                          MassTag tag) {
  std::vector<double> masses(space.size());
  for (int i = 0; i < space.size(); ++i) {
    masses[i] = f(space.position(i)) * space.volume(i);
  }
  return from_masses(std::move(masses), tag);
}

void SignedMeasure::set(int i, double mass, MassTag tag) {
  masses_.at(i) = mass;
  tags_.at(i) = tag;
}

void SignedMeasure::add_atom(int node, double mass, MassTag tag) {
  masses_.at(node) += mass;
  MassTag& t = tags_.at(node);
  if (t == MassTag::untagged) {
    t = tag;
  } else if (t != tag) {
    throw ConfigError("conflicting tags at node " + std::to_string(node));
  }
}

double SignedMeasure::tv_norm() const {
  double s = 0.0;
  for (double m : masses_) s += std::abs(m);
  return s;
}

double SignedMeasure::total() const {
  double s = 0.0;
  for (double m : masses_) s += m;
  return s;
}

double SignedMeasure::pair(std::span<const double> eta) const {
  if (static_cast<int>(eta.size()) != size()) {
    throw ConfigError("pairing dimension mismatch");
  }
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += eta[i] * masses_[i];
  return s;
}

std::pair<SignedMeasure, SignedMeasure> SignedMeasure::decompose() const {
  SignedMeasure d(size());
  SignedMeasure c(size());
  for (int i = 0; i < size(); ++i) {
    if (masses_[i] == 0.0) continue;
    switch (tags_[i]) {
      case MassTag::diffuse:
        d.set(i, masses_[i], MassTag::diffuse);
        break;
      case MassTag::concentrated:
        c.set(i, masses_[i], MassTag::concentrated);
        break;
      case MassTag::untagged:
        throw ConfigError("untagged atom: nonzero mass at node " +
                          std::to_string(i) + " has no diffuse/concentrated tag");
    }
  }
  return {std::move(d), std::move(c)};
}

SignedMeasure SignedMeasure::positive_part() const {
  SignedMeasure out(size());
  for (int i = 0; i < size(); ++i) {
    if (masses_[i] > 0.0) out.set(i, masses_[i], tags_[i]);
  }
  return out;
}

SignedMeasure SignedMeasure::negative_part() const {
  SignedMeasure out(size());
  for (int i = 0; i < size(); ++i) {
    if (masses_[i] < 0.0) out.set(i, -masses_[i], tags_[i]);
  }
  return out;
}

SignedMeasure SignedMeasure::absolute() const {
  SignedMeasure out(size());
  for (int i = 0; i < size(); ++i) {
    if (masses_[i] != 0.0) out.set(i, std::abs(masses_[i]), tags_[i]);
  }
  return out;
}

namespace {

MassTag combine_tags(MassTag a, double mass_a, MassTag b, double mass_b) {
  if (mass_a == 0.0) return b;
  if (mass_b == 0.0) return a;
  return a == b ? a : MassTag::untagged;
}

}  // namespace

SignedMeasure& SignedMeasure::operator+=(const SignedMeasure& other) {
  if (other.size() != size()) throw ConfigError("measure size mismatch in +");
  for (int i = 0; i < size(); ++i) {
    tags_[i] = combine_tags(tags_[i], masses_[i], other.tags_[i], other.masses_[i]);
    masses_[i] += other.masses_[i];
  }
  return *this;
}

SignedMeasure& SignedMeasure::operator-=(const SignedMeasure& other) {
  if (other.size() != size()) throw ConfigError("measure size mismatch in -");
  for (int i = 0; i < size(); ++i) {
    tags_[i] = combine_tags(tags_[i], masses_[i], other.tags_[i], other.masses_[i]);
    masses_[i] -= other.masses_[i];
  }
  return *this;
}

SignedMeasure& SignedMeasure::operator*=(double factor) {
  for (double& m : masses_) m *= factor;
  return *this;
}

namespace {

constexpr double kBoundSlack = 1e-9;

// Deterministic pair sampler for the Lipschitz validation on large spaces.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void validate_member(const TestDictionary::Member& member, const StateSpace& space,
                     std::span<const Point> extra_points) {
  const int n = space.size();
  auto check_sup = [&](const Point& p) {
    const double v = member.fn(p);
    if (!std::isfinite(v) || std::abs(v) > 1.0 + kBoundSlack) {
      throw ConfigError("dictionary member '" + member.name +
                        "' violates sup-norm bound 1");
    }
  };
  for (int i = 0; i < n; ++i) check_sup(space.position(i));
  for (const Point& p : extra_points) check_sup(p);

  auto check_pair = [&](const Point& a, const Point& b) {
    const double d = distance(a, b);
    if (d == 0.0) return;
    const double gap = std::abs(member.fn(a) - member.fn(b));
    if (gap > d * (1.0 + kBoundSlack) + kBoundSlack * 1e-3) {
      throw ConfigError("dictionary member '" + member.name +
                        "' violates Lipschitz bound 1");
    }
  };
  if (n <= 1024) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) check_pair(space.position(i), space.position(j));
    }
  } else {
    // Adjacent-index pairs plus a deterministic random sample.
    for (int i = 0; i + 1 < n; ++i) check_pair(space.position(i), space.position(i + 1));
    std::uint64_t s = 0x8f1bbcdcu;
    for (int t = 0; t < 20000; ++t) {
      s = mix64(s);
      const int i = static_cast<int>(s % n);
      s = mix64(s);
      const int j = static_cast<int>(s % n);
      if (i != j) check_pair(space.position(i), space.position(j));
    }
  }
}

}  // namespace

TestDictionary::TestDictionary(std::vector<Member> members, const StateSpace& space,
                               std::span<const Point> extra_check_points)
    : members_(std::move(members)) {
  if (members_.empty()) throw ConfigError("test dictionary must not be empty");
  for (const Member& m : members_) validate_member(m, space, extra_check_points);
}

TestDictionary TestDictionary::standard(const StateSpace& space,
                                        std::vector<Point> extra_tent_centers,
                                        int tents_per_side) {
  if (tents_per_side < 2) throw ConfigError("tents_per_side must be >= 2");
  std::vector<Member> members;
  members.push_back({"one", [](const Point&) { return 1.0; }});

  const auto [lo, hi] = space.bounding_box();
  const Point mid{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
  for (int axis = 0; axis < space.dim(); ++axis) {
    const double c = mid[axis];
    members.push_back({std::string("coord") + (axis == 0 ? "x" : "y"),
                       [axis, c](const Point& p) {
                         return std::clamp(p[axis] - c, -1.0, 1.0);
                       }});
  }

  auto add_tent = [&members](const Point& center, const std::string& name) {
    members.push_back({name, [center](const Point& p) {
                         return std::max(0.0, 1.0 - distance(p, center));
                       }});
  };
  for (int i = 0; i < tents_per_side; ++i) {
    const double fx = static_cast<double>(i) / (tents_per_side - 1);
    const double cx = lo[0] + fx * (hi[0] - lo[0]);
    if (space.dim() == 1) {
      add_tent({cx, 0.0}, "tent" + std::to_string(i));
    } else {
      for (int j = 0; j < tents_per_side; ++j) {
        const double fy = static_cast<double>(j) / (tents_per_side - 1);
        const double cy = lo[1] + fy * (hi[1] - lo[1]);
        add_tent({cx, cy}, "tent" + std::to_string(i) + "_" + std::to_string(j));
      }
    }
  }
  std::vector<Point> checks = extra_tent_centers;
  int idx = 0;
  for (const Point& c : extra_tent_centers) {
    add_tent(c, "atom_tent" + std::to_string(idx++));
  }
  return TestDictionary(std::move(members), space, checks);
}

std::vector<double> TestDictionary::on_nodes(int i, const StateSpace& space) const {
  std::vector<double> vals(space.size());
  for (int x = 0; x < space.size(); ++x) vals[x] = members_[i].fn(space.position(x));
  return vals;
}

double bl_distance(const SignedMeasure& mu, const SignedMeasure& nu,
                   const StateSpace& space, const TestDictionary& dict) {
  if (mu.size() != space.size() || nu.size() != space.size()) {
    throw ConfigError("bl_distance: measures must live on the given space");
  }
  double best = 0.0;
  for (int k = 0; k < dict.size(); ++k) {
    double s = 0.0;
    for (int x = 0; x < space.size(); ++x) {
      const double diff = mu.mass(x) - nu.mass(x);
      if (diff != 0.0) s += dict.evaluate(k, space.position(x)) * diff;
    }
    best = std::max(best, std::abs(s));
  }
  return best;
}

double bl_distance_to_atoms(const SignedMeasure& mu, const StateSpace& space,
                            std::span<const Atom> atoms,
                            const TestDictionary& dict) {
  if (mu.size() != space.size()) {
    throw ConfigError("bl_distance_to_atoms: measure must live on the given space");
  }
  double best = 0.0;
  for (int k = 0; k < dict.size(); ++k) {
    double s = 0.0;
    for (int x = 0; x < space.size(); ++x) {
      if (mu.mass(x) != 0.0) s += dict.evaluate(k, space.position(x)) * mu.mass(x);
    }
    for (const Atom& a : atoms) s -= dict.evaluate(k, a.position) * a.mass;
    best = std::max(best, std::abs(s));
  }
  return best;
}

}  // namespace renormlab
