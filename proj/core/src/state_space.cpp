#include "renormlab/state_space.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "renormlab/errors.hpp"

namespace renormlab {

StateSpace::StateSpace(int dim, std::vector<Point> positions, double spacing,
                       std::vector<double> volumes)
    : dim_(dim),
      positions_(std::move(positions)),
      spacing_(spacing),
      volumes_(std::move(volumes)) {
  if (dim_ != 1 && dim_ != 2) {
    throw ConfigError("state space dimension must be 1 or 2, got " +
                      std::to_string(dim_));
  }
  if (positions_.empty()) {
    throw ConfigError("state space needs at least one node");
  }
  if (volumes_.size() != positions_.size()) {
    throw ConfigError("volume vector size does not match node count");
  }
  if (!(spacing_ > 0.0)) {
    throw ConfigError("node spacing must be positive");
  }
  for (double v : volumes_) {
    if (!(v > 0.0)) {
      throw ConfigError("all volume weights m(x) must be positive");
    }
  }
  // Pairwise-distinct positions via lexicographic sort of an index permutation.
  std::vector<int> order(positions_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return positions_[a] < positions_[b];
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (positions_[order[i - 1]] == positions_[order[i]]) {
      throw ConfigError("node positions must be pairwise distinct (nodes " +
                        std::to_string(order[i - 1]) + " and " +
                        std::to_string(order[i]) + " coincide)");
    }
  }
}

StateSpace StateSpace::interior_line(double x0, double x1, int n_interior) {
  if (n_interior < 1) throw ConfigError("need at least one interior node");
  if (!(x1 > x0)) throw ConfigError("interval extent must satisfy x1 > x0");
  const double h = (x1 - x0) / (n_interior + 1);
  std::vector<Point> pts(n_interior);
  for (int i = 0; i < n_interior; ++i) pts[i] = {x0 + (i + 1) * h, 0.0};
  return StateSpace(1, std::move(pts), h, std::vector<double>(n_interior, h));
}

StateSpace StateSpace::interior_grid(double x0, double x1, int n_per_side) {
  if (n_per_side < 1) throw ConfigError("need at least one interior node per side");
  if (!(x1 > x0)) throw ConfigError("interval extent must satisfy x1 > x0");
  const double h = (x1 - x0) / (n_per_side + 1);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n_per_side) * n_per_side);
  for (int row = 0; row < n_per_side; ++row) {
    for (int col = 0; col < n_per_side; ++col) {
      pts.push_back({x0 + (col + 1) * h, x0 + (row + 1) * h});
    }
  }
  const std::size_t n = pts.size();
  return StateSpace(2, std::move(pts), h, std::vector<double>(n, h * h));
}

StateSpace StateSpace::cell_centered_line(double x0, double x1, int n_cells) {
  if (n_cells < 2) throw ConfigError("need at least two cells");
  if (!(x1 > x0)) throw ConfigError("interval extent must satisfy x1 > x0");
  const double h = (x1 - x0) / n_cells;
  std::vector<Point> pts(n_cells);
  for (int i = 0; i < n_cells; ++i) pts[i] = {x0 + (i + 0.5) * h, 0.0};
  return StateSpace(1, std::move(pts), h, std::vector<double>(n_cells, h));
}

std::pair<Point, Point> StateSpace::bounding_box() const {
  Point lo = positions_[0];
  Point hi = positions_[0];
  for (const Point& p : positions_) {
    lo[0] = std::min(lo[0], p[0]);
    lo[1] = std::min(lo[1], p[1]);
    hi[0] = std::max(hi[0], p[0]);
    hi[1] = std::max(hi[1], p[1]);
  }
  return {lo, hi};
}

int StateSpace::nearest_node(const Point& p) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) {
    const double d = distance(positions_[i], p);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace renormlab
