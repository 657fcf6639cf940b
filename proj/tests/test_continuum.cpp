#include <doctest.h>

#include <cmath>
#include <vector>

#include "renormlab/continuum.hpp"
#include "renormlab/errors.hpp"
#include "renormlab/form.hpp"
#include "renormlab/green.hpp"
#include "renormlab/renorm.hpp"

using namespace renormlab;

namespace {
constexpr double kTwoPi = 6.283185307179586;
}

TEST_CASE("log potential level sets") {
  const LogPotential2d ex;
  CHECK(ex.level_radius(1.0) == doctest::Approx(std::exp(-kTwoPi)));
  CHECK(ex.value(ex.level_radius(2.5)) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("reconstruction: analytic antiderivative oracle gives 2") {
  const LogPotential2d ex;
  auto one = [](double) { return 1.0; };
  CHECK(std::abs(ex.reconstruction(1.0, 2.0, one) - 2.0) <= 1e-6);
  CHECK(std::abs(ex.reconstruction(5.0, 5.1, one) - 2.0) <= 1e-6);
  CHECK_THROWS_AS(ex.reconstruction(2.0, 1.0, one), ConfigError);
}

TEST_CASE("reconstruction is level-independent across random pairs") {
  const LogPotential2d ex;
  auto one = [](double) { return 1.0; };
  const std::pair<double, double> pairs[5] = {
      {0.5, 1.5}, {1.0, 2.0}, {2.0, 3.0}, {4.0, 4.2}, {0.25, 5.0}};
  double lo = 1e300, hi = -1e300;
  for (const auto& [b, c] : pairs) {
    const double v = ex.reconstruction(b, c, one);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo <= 1e-6);
  CHECK(std::abs(lo - 2.0) <= 1e-6);
}

TEST_CASE("reconstruction with eta vanishing near the origin") {
  const LogPotential2d ex;
  // eta = 0 for r <= 0.1, ramps to 1 by r = 0.2 (Lipschitz 10 but bounded by 1)
  auto eta = [](double r) { return std::clamp(10.0 * (r - 0.1), 0.0, 1.0); };
  // levels b = 1 mean radii <= exp(-2pi) ~ 0.0019, inside the vanishing region
  const double v = ex.reconstruction(1.0, 2.0, eta);
  CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("local time masses: <l_a, 1> = 2 across levels") {
  const LogPotential2d ex;
  auto one = [](double) { return 1.0; };
  for (double a : {0.5, 1.0, 5.0}) {
    CHECK(std::abs(ex.local_time_mass(a, one) - 2.0) <= 1e-6);
  }
}

TEST_CASE("occupation identity: indicator window, eta == 1") {
  const LogPotential2d ex;
  auto one = [](double) { return 1.0; };
  const auto res = ex.occupation([](double) { return 1.0; }, 1.0, 2.0, one);
  CHECK(res.lhs == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(res.lhs - res.rhs) <= 1e-6);
}

TEST_CASE("occupation identity holds for a family of (phi, eta) pairs") {
  const LogPotential2d ex;
  struct Case {
    std::function<double(double)> phi;
    double lo, hi;
    std::function<double(double)> eta;
  };
  const Case cases[] = {
      {[](double) { return 1.0; }, 0.5, 1.0, [](double r) { return std::cos(r); }},
      {[](double a) { return a; }, 1.0, 3.0, [](double) { return 1.0; }},
      {[](double a) { return std::exp(-a); }, 0.25, 2.0,
       [](double r) { return 1.0 / (1.0 + r * r); }},
      {[](double a) { return (a - 1.0) * (2.0 - a); }, 1.0, 2.0,
       [](double r) { return std::min(1.0, 2.0 * r); }},
      {[](double) { return 1.0; }, 4.0, 4.5, [](double r) { return std::exp(-r); }},
  };
  for (const Case& c : cases) {
    const auto res = ex.occupation(c.phi, c.lo, c.hi, c.eta);
    const double scale = std::max({1.0, std::abs(res.lhs), std::abs(res.rhs)});
    CHECK(std::abs(res.lhs - res.rhs) <= 1e-6 * scale);
  }
  CHECK_THROWS_AS(ex.occupation([](double) { return 1.0; }, 0.0, 1.0,
                                [](double) { return 1.0; }),
                  ConfigError);
}

TEST_CASE("riesz quadrature: constant profiles have zero jump density") {
  Riesz1dExample ex;
  ex.alpha = 0.5;
  Profile1d constant;
  constant.fn = [](double) { return 0.7; };
  const std::vector<double> pts{0.2, 0.5, 0.8};
  for (double v : riesz_jk_quadrature(ex, constant, 0.4, pts)) {
    CHECK(std::abs(v) <= 1e-12);
  }
}

TEST_CASE("riesz integrand is a nonnegative convexity gap") {
  // sampled directly: |t-k| - |s-k| - sign(s-k)(t-s) >= 0 for sign(0) = -1
  auto gap = [](double s, double t, double k) {
    const double sg = (s - k) > 0.0 ? 1.0 : -1.0;
    return std::abs(t - k) - std::abs(s - k) - sg * (t - s);
  };
  std::uint64_t state = 99;
  auto unit = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  for (int i = 0; i < 2000; ++i) {
    const double s = 4.0 * unit() - 2.0;
    const double t = 4.0 * unit() - 2.0;
    const double k = 4.0 * unit() - 2.0;
    CHECK(gap(s, t, k) >= -1e-15);
  }
  CHECK(gap(0.3, 0.9, 0.3) >= 0.0);  // s == k exactly
}

TEST_CASE("riesz quadrature cross-validates the lattice jump density") {
  // moderate resolution here; the 256-node acceptance instance runs separately
  const double alpha = 0.5, c = 1.0;
  const DiscreteForm form = build_fractional_form({128, 0.0, 1.0, alpha, c});
  const GreenOperator green(form);
  const SignedMeasure mu = SignedMeasure::from_density(
      form.space(),
      [](const Point& p) {
        const double t = std::min(std::abs(p[0] - 0.5) / 0.35, 1.0);
        const double v = std::cos(0.5 * M_PI * t);
        return v * v;
      },
      MassTag::diffuse);
  const std::vector<double> u = green.apply(mu);
  double sup = 0.0;
  for (double x : u) sup = std::max(sup, std::abs(x));
  const double k = 0.5 * sup;

  const SignedMeasure j = jump_lambda(form, u, k);
  const Profile1d prof = lattice_profile(form.space(), u, 0.0, 1.0);
  Riesz1dExample ex;
  ex.alpha = alpha;
  ex.constant = c;

  std::vector<int> nodes;
  std::vector<double> pts;
  for (double frac : {0.15, 0.35, 0.5, 0.65, 0.85}) {
    const int node = static_cast<int>(frac * form.size());
    nodes.push_back(node);
    pts.push_back(form.space().position(node)[0]);
  }
  const std::vector<double> quad = riesz_jk_quadrature(ex, prof, k, pts);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double lattice_density = j.mass(nodes[i]) / form.space().volume(nodes[i]);
    CHECK(quad[i] == doctest::Approx(lattice_density).epsilon(0.02));
  }
}

TEST_CASE("riesz quadrature reports non-decaying tails") {
  Riesz1dExample ex;
  ex.alpha = 0.5;
  Profile1d growing;
  growing.fn = [](double y) { return y * y; };
  const std::vector<double> pts{0.0};
  CHECK_THROWS_AS(riesz_jk_quadrature(ex, growing, 1.0, pts), SolverError);
}
