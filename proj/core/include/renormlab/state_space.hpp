#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

namespace renormlab {

/// A node position in R^d, d <= 2. The second coordinate is 0 in 1D.
using Point = std::array<double, 2>;

inline double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

/// Finite state space: indexed node positions with reference volumes m(x).
///
/// Indices are contiguous 0..n-1. Volumes are the cell volumes h^d unless
/// overridden; all volumes are strictly positive and positions are pairwise
/// distinct (checked at construction).
class StateSpace {
public:
  StateSpace(int dim, std::vector<Point> positions, double spacing,
             std::vector<double> volumes);

  /// Interior nodes of [x0, x1]: x0 + i*h for i = 1..n, h = (x1-x0)/(n+1).
  static StateSpace interior_line(double x0, double x1, int n_interior);

  /// Interior nodes of [x0, x1]^2 on an n-per-side grid, row-major indexing.
  static StateSpace interior_grid(double x0, double x1, int n_per_side);

  /// Cell-centred nodes of [x0, x1]: x0 + (i + 1/2)*h, h = (x1-x0)/n.
  static StateSpace cell_centered_line(double x0, double x1, int n_cells);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(positions_.size()); }
  double spacing() const { return spacing_; }
  const Point& position(int i) const { return positions_[i]; }
  double volume(int i) const { return volumes_[i]; }
  const std::vector<double>& volumes() const { return volumes_; }

  std::pair<Point, Point> bounding_box() const;
  int nearest_node(const Point& p) const;

private:
  int dim_;
  std::vector<Point> positions_;
  double spacing_;
  std::vector<double> volumes_;
};

}  // namespace renormlab
