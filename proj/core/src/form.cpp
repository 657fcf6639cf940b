#include "renormlab/form.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "renormlab/errors.hpp"

namespace renormlab {

DiscreteForm::DiscreteForm(StateSpace space, std::vector<EdgeSpec> edges,
                           std::vector<double> kappa, std::string descriptor)
    : space_(std::move(space)),
      kappa_(std::move(kappa)),
      descriptor_(std::move(descriptor)) {
  const int n = space_.size();
  if (static_cast<int>(kappa_.size()) != n) {
    throw ConfigError("kappa vector size does not match node count");
  }
  for (double k : kappa_) {
    if (k < 0.0 || !std::isfinite(k)) throw ConfigError("kappa must be nonnegative");
  }
  std::vector<int> degree(n, 0);
  for (const EdgeSpec& e : edges) {
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n) {
      throw ConfigError("edge endpoint out of range");
    }
    if (e.a == e.b) throw ConfigError("J must have zero diagonal");
    if (e.j < 0.0 || !std::isfinite(e.j)) {
      throw ConfigError("jump intensities must be nonnegative");
    }
    ++degree[e.a];
    ++degree[e.b];
  }
  offsets_.assign(n + 1, 0);
  for (int x = 0; x < n; ++x) offsets_[x + 1] = offsets_[x] + degree[x];
  adjacency_.resize(offsets_[n]);
  std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const EdgeSpec& e : edges) {
    adjacency_[cursor[e.a]++] = Neighbor{e.b, e.j, e.local};
    adjacency_[cursor[e.b]++] = Neighbor{e.a, e.j, e.local};
  }
  for (int x = 0; x < n; ++x) {
    std::sort(adjacency_.begin() + offsets_[x], adjacency_.begin() + offsets_[x + 1],
              [](const Neighbor& p, const Neighbor& q) { return p.node < q.node; });
    for (int i = offsets_[x] + 1; i < offsets_[x + 1]; ++i) {
      if (adjacency_[i].node == adjacency_[i - 1].node) {
        throw ConfigError("duplicate edge between nodes " + std::to_string(x) +
                          " and " + std::to_string(adjacency_[i].node));
      }
    }
  }
}

void DiscreteForm::check_dim(std::span<const double> u, const char* what) const {
  if (static_cast<int>(u.size()) != size()) {
    throw ConfigError(std::string(what) + ": node function has wrong length");
  }
}

std::vector<double> DiscreteForm::apply_stiffness(std::span<const double> u) const {
  check_dim(u, "apply_stiffness");
  std::vector<double> out(size());
  for (int x = 0; x < size(); ++x) {
    double acc = kappa_[x] * u[x];
    for (const Neighbor& nb : neighbors(x)) {
      acc += 2.0 * nb.j * (u[x] - u[nb.node]);
    }
    out[x] = acc;
  }
  return out;
}

double DiscreteForm::energy(std::span<const double> u, std::span<const double> v) const {
  check_dim(u, "energy");
  check_dim(v, "energy");
  double acc = 0.0;
  for (int x = 0; x < size(); ++x) {
    for (const Neighbor& nb : neighbors(x)) {
      acc += nb.j * (u[x] - u[nb.node]) * (v[x] - v[nb.node]);
    }
    acc += kappa_[x] * u[x] * v[x];
  }
  return acc;
}

double DiscreteForm::energy_part(std::span<const double> u, std::span<const double> v,
                                 bool local_part) const {
  check_dim(u, "energy_part");
  check_dim(v, "energy_part");
  double acc = 0.0;
  for (int x = 0; x < size(); ++x) {
    for (const Neighbor& nb : neighbors(x)) {
      if (nb.local != local_part) continue;
      acc += nb.j * (u[x] - u[nb.node]) * (v[x] - v[nb.node]);
    }
  }
  return acc;
}

double DiscreteForm::killing_energy(std::span<const double> u,
                                    std::span<const double> v) const {
  check_dim(u, "killing_energy");
  check_dim(v, "killing_energy");
  double acc = 0.0;
  for (int x = 0; x < size(); ++x) acc += kappa_[x] * u[x] * v[x];
  return acc;
}

std::pair<SignedMeasure, SignedMeasure> DiscreteForm::energy_measure(
    std::span<const double> u) const {
  check_dim(u, "energy_measure");
  SignedMeasure local(size());
  SignedMeasure jump(size());
  for (int x = 0; x < size(); ++x) {
    double loc = 0.0, jmp = 0.0;
    for (const Neighbor& nb : neighbors(x)) {
      const double d = u[x] - u[nb.node];
      (nb.local ? loc : jmp) += 2.0 * nb.j * d * d;
    }
    if (loc != 0.0) local.set(x, loc, MassTag::diffuse);
    if (jmp != 0.0) jump.set(x, jmp, MassTag::diffuse);
  }
  return {std::move(local), std::move(jump)};
}

double DiscreteForm::extended_energy(std::span<const double> u,
                                     const CompactFunction& h,
                                     std::span<const double> eta) const {
  check_dim(u, "extended_energy");
  check_dim(eta, "extended_energy");
  if (!h.fn) throw ConfigError("extended_energy: h has no callable");
  if (!(h.support_bound > 0.0) || !std::isfinite(h.support_bound)) {
    throw ConfigError("extended_energy: h needs a declared finite support bound");
  }
  const double M = h.support_bound;
  std::vector<double> hu(size());
  std::vector<double> tm(size());
  for (int x = 0; x < size(); ++x) {
    hu[x] = h.fn(u[x]);
    tm[x] = std::clamp(u[x], -M, M);
  }
  double local = 0.0, jump_sym = 0.0, jump_eta = 0.0, kill = 0.0;
  for (int x = 0; x < size(); ++x) {
    for (const Neighbor& nb : neighbors(x)) {
      const int y = nb.node;
      if (nb.local) {
        local += nb.j * (tm[x] - tm[y]) * (hu[x] * eta[x] - hu[y] * eta[y]);
      } else {
        const double du = u[x] - u[y];
        jump_sym += nb.j * du * (hu[x] - hu[y]) * 0.5 * (eta[x] + eta[y]);
        jump_eta += nb.j * du * (eta[x] - eta[y]) * 0.5 * (hu[x] + hu[y]);
      }
    }
    kill += kappa_[x] * u[x] * hu[x] * eta[x];
  }
  return local + jump_sym + jump_eta + kill;
}

Eigen::SparseMatrix<double> DiscreteForm::stiffness_matrix() const {
  const int n = size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(adjacency_.size() + n);
  for (int x = 0; x < n; ++x) {
    double diag = kappa_[x];
    for (const Neighbor& nb : neighbors(x)) {
      diag += 2.0 * nb.j;
      trips.emplace_back(x, nb.node, -2.0 * nb.j);
    }
    trips.emplace_back(x, x, diag);
  }
  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

std::string DiscreteForm::to_debug_json() const {
  nlohmann::ordered_json out;
  out["descriptor"] = descriptor_;
  out["dim"] = space_.dim();
  out["spacing"] = space_.spacing();
  auto& nodes = out["nodes"] = nlohmann::json::array();
  for (int i = 0; i < size(); ++i) {
    const Point& p = space_.position(i);
    if (space_.dim() == 1) {
      nodes.push_back({p[0]});
    } else {
      nodes.push_back({p[0], p[1]});
    }
  }
  auto& jt = out["J"] = nlohmann::json::array();
  for (int x = 0; x < size(); ++x) {
    for (const Neighbor& nb : neighbors(x)) {
      if (nb.node > x) {
        jt.push_back({x, nb.node, nb.j, nb.local});
      }
    }
  }
  out["kappa"] = kappa_;
  out["m"] = space_.volumes();
  return out.dump(2);
}

DiscreteForm build_local_form(const LocalGridSpec& spec) {
  if (spec.dim != 1 && spec.dim != 2) {
    throw ConfigError("local form dimension must be 1 or 2");
  }
  if (spec.n_per_side < 1) throw ConfigError("n_per_side must be >= 1");
  auto a_of = [&spec](const Point& mid) {
    const double a = spec.conductance ? spec.conductance(mid) : 1.0;
    if (!(a > 0.0)) throw ConfigError("conductance must be strictly positive");
    return a;
  };

  std::vector<DiscreteForm::EdgeSpec> edges;
  if (spec.dim == 1) {
    StateSpace space = StateSpace::interior_line(spec.extent_lo, spec.extent_hi,
                                                 spec.n_per_side);
    const double h = space.spacing();
    const double scale = 1.0 / h;  // h^{d-2}, d = 1
    const int n = space.size();
    std::vector<double> kappa(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) {
      Point mid{0.5 * (space.position(i)[0] + space.position(i + 1)[0]), 0.0};
      edges.push_back({i, i + 1, 0.5 * a_of(mid) * scale, true});
    }
    kappa[0] += a_of({spec.extent_lo + 0.5 * h, 0.0}) * scale;
    kappa[n - 1] += a_of({spec.extent_hi - 0.5 * h, 0.0}) * scale;
    return DiscreteForm(std::move(space), std::move(edges), std::move(kappa),
                        "local1d(n=" + std::to_string(spec.n_per_side) + ")");
  }

  StateSpace space = StateSpace::interior_grid(spec.extent_lo, spec.extent_hi,
                                               spec.n_per_side);
  const int n_side = spec.n_per_side;
  const int n = space.size();
  std::vector<double> kappa(n, 0.0);
  auto idx = [n_side](int row, int col) { return row * n_side + col; };
  for (int row = 0; row < n_side; ++row) {
    for (int col = 0; col < n_side; ++col) {
      const int x = idx(row, col);
      const Point& p = space.position(x);
      const double h = space.spacing();
      // h^{d-2} = 1 in 2D
      if (col + 1 < n_side) {
        Point mid{p[0] + 0.5 * h, p[1]};
        edges.push_back({x, idx(row, col + 1), 0.5 * a_of(mid), true});
      }
      if (row + 1 < n_side) {
        Point mid{p[0], p[1] + 0.5 * h};
        edges.push_back({x, idx(row + 1, col), 0.5 * a_of(mid), true});
      }
      if (col == 0) kappa[x] += a_of({p[0] - 0.5 * h, p[1]});
      if (col == n_side - 1) kappa[x] += a_of({p[0] + 0.5 * h, p[1]});
      if (row == 0) kappa[x] += a_of({p[0], p[1] - 0.5 * h});
      if (row == n_side - 1) kappa[x] += a_of({p[0], p[1] + 0.5 * h});
    }
  }
  return DiscreteForm(std::move(space), std::move(edges), std::move(kappa),
                      "local2d(n=" + std::to_string(spec.n_per_side) + ")");
}

double fractional_killing(double x, double lo, double hi, double h, double alpha,
                          double c) {
  const double dl = x - lo;
  const double dr = hi - x;
  if (!(dl > 0.0) || !(dr > 0.0)) {
    throw ConfigError("fractional_killing: x must lie inside (lo, hi)");
  }
  // antiderivative of z^{-1-2a} over [d, inf) is d^{-2a} / (2a)
  const double tail = (std::pow(dl, -2.0 * alpha) + std::pow(dr, -2.0 * alpha)) /
                      (2.0 * alpha);
  return 2.0 * c * h * tail;
}

DiscreteForm build_fractional_form(const FractionalIntervalSpec& spec) {
  if (!(spec.alpha > 0.0) || !(spec.alpha < 1.0)) {
    throw ConfigError("fractional exponent alpha must lie in (0,1)");
  }
  if (spec.n_nodes < 2) throw ConfigError("fractional form needs n >= 2 nodes");
  if (!(spec.constant > 0.0)) throw ConfigError("kernel constant must be positive");

  StateSpace space = StateSpace::cell_centered_line(spec.extent_lo, spec.extent_hi,
                                                    spec.n_nodes);
  const int n = space.size();
  const double h = space.spacing();
  const double c = spec.constant;
  const double alpha = spec.alpha;

  std::vector<DiscreteForm::EdgeSpec> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  // Sub-grid singular range |x-y| <= h collapsed onto the nearest-neighbour
  // proxy conductance c h^{1-2a}/(1-a), i.e. J = conductance / 2.
  const double proxy_j = 0.5 * c * std::pow(h, 1.0 - 2.0 * alpha) / (1.0 - alpha);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j == i + 1) {
        edges.push_back({i, j, proxy_j, true});
      } else {
        const double r = (j - i) * h;
        edges.push_back({i, j, c * h * h * std::pow(r, -1.0 - 2.0 * alpha), false});
      }
    }
  }
  std::vector<double> kappa(n);
  for (int i = 0; i < n; ++i) {
    kappa[i] = fractional_killing(space.position(i)[0], spec.extent_lo,
                                  spec.extent_hi, h, alpha, c);
  }
  return DiscreteForm(std::move(space), std::move(edges), std::move(kappa),
                      "fractional1d(n=" + std::to_string(spec.n_nodes) +
                          ",alpha=" + std::to_string(alpha) + ")");
}

}  // namespace renormlab
