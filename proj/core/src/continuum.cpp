#include "renormlab/continuum.hpp"

#include <algorithm>
#include <cmath>

#include "renormlab/errors.hpp"

namespace renormlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr double kGlNode[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeight[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

template <typename F>
double gl_panel(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) acc += kGlWeight[i] * f(mid + half * kGlNode[i]);
  return acc * half;
}

template <typename F>
double gl_composite(F&& f, double a, double b, int panels) {
  panels = std::max(panels, 1);
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double pa = a + (b - a) * p / panels;
    const double pb = a + (b - a) * (p + 1) / panels;
    acc += gl_panel(f, pa, pb);
  }
  return acc;
}

inline double sign_minus(double s) { return s > 0.0 ? 1.0 : -1.0; }

inline double convexity_gap(double s, double t, double a) {
  return std::abs(t - a) - std::abs(s - a) - sign_minus(s - a) * (t - s);
}

}  // namespace

double LogPotential2d::value(double r) const {
  if (!(r > 0.0)) throw ConfigError("log potential undefined at r <= 0");
  return std::log(1.0 / r) / kTwoPi;
}

double LogPotential2d::level_radius(double a) const { return std::exp(-kTwoPi * a); }

double LogPotential2d::reconstruction(
    double b, double c, const std::function<double(double)>& eta_radial) const {
  if (!(b > 0.0) || !(c > b)) {
    throw ConfigError("reconstruction needs levels 0 < b < c");
  }
  // On {b <= u <= c} the density 2|grad u|^2 integrates, per unit level, to
  // 2 eta(r_a) after the radial reduction r_a = exp(-2 pi a).
  const int panels = std::clamp(static_cast<int>(std::ceil((c - b) * quad_.radial_nodes)),
                                8, 8192);
  const double integral = gl_composite(
      [&](double a) { return eta_radial(level_radius(a)); }, b, c, panels);
  return 2.0 * integral / (c - b);
}

double LogPotential2d::local_time_mass(
    double a, const std::function<double(double)>& eta_radial) const {
  const double r = level_radius(a);
  const double grad = 1.0 / (kTwoPi * r);
  // Line integral over the circle {|x| = r_a}: trapezoid in the angle.
  const int n = std::max(quad_.radial_nodes, 16);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += eta_radial(r) * 2.0 * grad;  // radial eta: constant along the circle
  }
  return acc * (kTwoPi * r) / n;
}

LogPotential2d::OccupationResult LogPotential2d::occupation(
    const std::function<double(double)>& phi, double support_lo, double support_hi,
    const std::function<double(double)>& eta_radial) const {
  if (!(support_lo > 0.0) || !(support_hi > support_lo) ||
      !std::isfinite(support_hi)) {
    throw ConfigError(
        "occupation: phi support must be a compact interval inside (0, inf)");
  }
  OccupationResult out;
  const int panels =
      std::clamp(static_cast<int>(std::ceil((support_hi - support_lo) *
                                            quad_.radial_nodes)),
                 8, 8192);
  out.lhs = gl_composite(
      [&](double a) { return local_time_mass(a, eta_radial) * phi(a); },
      support_lo, support_hi, panels);

  // Area quadrature of <mu^c_<u>, phi(u) eta> over the annulus, in the
  // log-radius variable s = log r (area element collapses to ds / pi).
  const double s_lo = std::log(level_radius(support_hi));
  const double s_hi = std::log(level_radius(support_lo));
  out.rhs = gl_composite(
      [&](double s) {
        const double r = std::exp(s);
        return phi(value(r)) * eta_radial(r) / kPi;
      },
      s_lo, s_hi, panels);
  return out;
}

Profile1d lattice_profile(const StateSpace& space, std::span<const double> u,
                          double lo, double hi) {
  if (space.dim() != 1) throw ConfigError("lattice_profile needs a 1D space");
  if (static_cast<int>(u.size()) != space.size()) {
    throw ConfigError("lattice_profile: size mismatch");
  }
  const int n = space.size();
  std::vector<double> xs(n), vals(u.begin(), u.end());
  for (int i = 0; i < n; ++i) xs[i] = space.position(i)[0];

  Profile1d prof;
  prof.zero_outside = true;
  prof.support_lo = lo;
  prof.support_hi = hi;
  prof.breakpoints.push_back(lo);
  prof.breakpoints.insert(prof.breakpoints.end(), xs.begin(), xs.end());
  prof.breakpoints.push_back(hi);
  prof.fn = [xs = std::move(xs), vals = std::move(vals), lo, hi](double y) {
    if (y <= lo || y >= hi) return 0.0;
    if (y <= xs.front()) {
      return vals.front() * (y - lo) / (xs.front() - lo);
    }
    if (y >= xs.back()) {
      return vals.back() * (hi - y) / (hi - xs.back());
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double t = (y - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return vals[i - 1] + t * (vals[i] - vals[i - 1]);
  };
  return prof;
}

std::vector<double> riesz_jk_quadrature(const Riesz1dExample& ex,
                                        const Profile1d& u, double k,
                                        std::span<const double> eval_points) {
  if (!(ex.alpha > 0.0) || !(ex.alpha < 1.0)) {
    throw ConfigError("riesz quadrature: alpha must lie in (0,1)");
  }
  if (!u.fn) throw ConfigError("riesz quadrature: profile has no callable");
  const double alpha = ex.alpha;
  const double two_alpha = 2.0 * alpha;

  std::vector<double> out;
  out.reserve(eval_points.size());
  for (double x : eval_points) {
    const double s = u.fn(x);
    auto integrand = [&](double y) {
      return convexity_gap(s, u.fn(y), k) * std::pow(std::abs(x - y), -1.0 - two_alpha);
    };

    // Interior panels between breakpoints (plus a split at x itself).
    std::vector<double> splits(u.breakpoints);
    splits.push_back(x);
    if (!u.zero_outside) {
      splits.push_back(x - 1.0);
      splits.push_back(x + 1.0);
    }
    std::sort(splits.begin(), splits.end());
    splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < splits.size(); ++i) {
      acc += gl_panel(integrand, splits[i], splits[i + 1]);
    }

    // Tails beyond the outermost splits.
    const double left = splits.front();
    const double right = splits.back();
    if (u.zero_outside) {
      // Outside the support u vanishes, so the gap is the constant killing gap.
      const double gap0 = convexity_gap(s, 0.0, k);
      const double dl = x - u.support_lo;
      const double dr = u.support_hi - x;
      if (!(dl > 0.0) || !(dr > 0.0)) {
        throw ConfigError("riesz quadrature: evaluation point outside the support");
      }
      acc += gap0 * (std::pow(dl, -two_alpha) + std::pow(dr, -two_alpha)) / two_alpha;
    } else {
      // Decay probe, then the substitution y = x +- d/t maps each tail to (0,1].
      for (double probe : {1e3, 1e6}) {
        const double g1 = std::abs(u.fn(x + probe));
        const double g2 = std::abs(u.fn(x - probe));
        if (g1 > 1e9 || g2 > 1e9) {
          throw SolverError("riesz quadrature: non-integrable tail, profile "
                            "does not stay bounded");
        }
      }
      for (int dir : {-1, 1}) {
        const double d = dir > 0 ? right - x : x - left;
        acc += gl_composite(
            [&](double t) {
              const double y = x + dir * d / t;
              return integrand(y) * d / (t * t);
            },
            1e-8, 1.0, 64);
      }
    }
    out.push_back(2.0 * ex.constant * acc);
  }
  return out;
}

}  // namespace renormlab
