#include "renormlab/green.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "renormlab/errors.hpp"

namespace renormlab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

Vec to_eigen(std::span<const double> v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> from_eigen(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

struct GreenOperator::Impl {
  SpMat L;
  bool direct = false;
  Eigen::SimplicialLDLT<SpMat> ldlt;

  Vec solve_system(const SpMat& A, const Vec& b, const Config& cfg,
                   bool use_direct) const {
    if (use_direct) {
      if (&A == &L) return ldlt.solve(b);
      Eigen::SimplicialLDLT<SpMat> local(A);
      if (local.info() != Eigen::Success) {
        throw SolverError("sparse Cholesky factorisation failed");
      }
      return local.solve(b);
    }
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(cfg.tolerance * 0.1);
    cg.setMaxIterations(cfg.max_iterations);
    cg.compute(A);
    Vec x = cg.solve(b);
    if (cg.info() != Eigen::Success) {
      throw SolverError("conjugate gradient did not converge: residual " +
                        std::to_string(cg.error()));
    }
    return x;
  }
};

GreenOperator::GreenOperator(const DiscreteForm& form)
    : GreenOperator(form, Config{}) {}

GreenOperator::GreenOperator(const DiscreteForm& form, Config config)
    : form_(&form), config_(config), impl_(std::make_unique<Impl>()) {
  impl_->L = form.stiffness_matrix();
  impl_->direct = form.size() <= config_.direct_threshold;
  if (impl_->direct) {
    impl_->ldlt.compute(impl_->L);
    if (impl_->ldlt.info() != Eigen::Success) {
      throw SolverError(
          "stiffness factorisation failed; is the form transient (kappa "
          "nonzero on every component)?");
    }
  }
}

GreenOperator::~GreenOperator() = default;
GreenOperator::GreenOperator(GreenOperator&&) noexcept = default;
GreenOperator& GreenOperator::operator=(GreenOperator&&) noexcept = default;

bool GreenOperator::uses_direct_solver() const { return impl_->direct; }

std::vector<double> GreenOperator::solve(std::span<const double> b) const {
  if (static_cast<int>(b.size()) != form_->size()) {
    throw ConfigError("solve: right-hand side has wrong length");
  }
  const Vec rhs = to_eigen(b);
  Vec x = impl_->solve_system(impl_->L, rhs, config_, impl_->direct);
  const double bn = rhs.norm();
  const double res = (impl_->L * x - rhs).norm();
  if (bn > 0.0 && res > config_.tolerance * bn) {
    throw SolverError("solve residual " + std::to_string(res / bn) +
                      " exceeds tolerance " + std::to_string(config_.tolerance));
  }
  return from_eigen(x);
}

std::vector<double> GreenOperator::apply(const SignedMeasure& mu) const {
  return solve(mu.masses());
}

std::vector<double> GreenOperator::resolvent(double alpha,
                                             std::span<const double> f) const {
  if (alpha < 0.0) throw ConfigError("resolvent rate alpha must be >= 0");
  if (static_cast<int>(f.size()) != form_->size()) {
    throw ConfigError("resolvent: function has wrong length");
  }
  const int n = form_->size();
  Vec rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = form_->space().volume(i) * f[i];
  if (alpha == 0.0) {
    return solve(std::span<const double>(rhs.data(), rhs.size()));
  }
  SpMat A = impl_->L;
  for (int i = 0; i < n; ++i) {
    A.coeffRef(i, i) += alpha * form_->space().volume(i);
  }
  A.makeCompressed();
  Vec x = impl_->solve_system(A, rhs, config_, impl_->direct);
  const double bn = rhs.norm();
  const double res = (A * x - rhs).norm();
  if (bn > 0.0 && res > config_.tolerance * bn) {
    throw SolverError("resolvent residual exceeds tolerance");
  }
  return from_eigen(x);
}

CapacityResult capacity(const GreenOperator& green, std::span<const int> nodes) {
  const DiscreteForm& form = green.form();
  const int n = form.size();
  CapacityResult out;
  out.equilibrium_potential.assign(n, 0.0);
  if (nodes.empty()) return out;

  std::vector<char> in_b(n, 0);
  for (int b : nodes) {
    if (b < 0 || b >= n) throw ConfigError("capacity: node index out of range");
    in_b[b] = 1;
  }
  // Reduced system over free nodes: L_FF e_F = -L_FB 1.
  std::vector<int> free_index(n, -1);
  int n_free = 0;
  for (int x = 0; x < n; ++x) {
    if (!in_b[x]) free_index[x] = n_free++;
  }
  std::vector<double>& e = out.equilibrium_potential;
  for (int x = 0; x < n; ++x) {
    if (in_b[x]) e[x] = 1.0;
  }
  if (n_free > 0) {
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);
    for (int x = 0; x < n; ++x) {
      if (in_b[x]) continue;
      const int fx = free_index[x];
      double diag = form.kappa(x);
      for (const DiscreteForm::Neighbor& nb : form.neighbors(x)) {
        diag += 2.0 * nb.j;
        if (in_b[nb.node]) {
          rhs[fx] += 2.0 * nb.j;  // - L_FB * 1 with L_FB = -2J
        } else {
          trips.emplace_back(fx, free_index[nb.node], -2.0 * nb.j);
        }
      }
      trips.emplace_back(fx, fx, diag);
    }
    SpMat A(n_free, n_free);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success) {
      throw SolverError("capacity: reduced factorisation failed");
    }
    const Eigen::VectorXd ef = ldlt.solve(rhs);
    for (int x = 0; x < n; ++x) {
      if (!in_b[x]) e[x] = ef[free_index[x]];
    }
  }
  out.capacity = form.energy(e, e);
  return out;
}

ExcessiveCheck is_excessive(const DiscreteForm& form, std::span<const double> u,
                            double tol) {
  const std::vector<double> lu = form.apply_stiffness(u);
  ExcessiveCheck out;
  double worst = 0.0;
  int worst_node = -1;
  for (int x = 0; x < form.size(); ++x) {
    const double v = std::min(u[x], lu[x]);
    if (v < worst) {
      worst = v;
      worst_node = x;
    }
  }
  if (worst < -tol) {
    out.excessive = false;
    out.witness = worst_node;
    out.violation = worst;
  } else {
    out.excessive = true;
  }
  return out;
}

std::vector<double> excessive_majorant(const GreenOperator& green,
                                       std::span<const double> h, double penalty,
                                       std::span<const double> g,
                                       ObstacleConfig config) {
  const DiscreteForm& form = green.form();
  const int n = form.size();
  if (static_cast<int>(h.size()) != n || static_cast<int>(g.size()) != n) {
    throw ConfigError("excessive_majorant: dimension mismatch");
  }
  if (penalty < 0.0) throw ConfigError("penalty level must be >= 0");
  for (int x = 0; x < n; ++x) {
    if (!(g[x] > 0.0)) throw ConfigError("running cost g must be strictly positive");
  }

  // LCP: v >= h, L v - b >= 0 and complementarity, with b = -penalty * M g.
  std::vector<double> diag(n), b(n);
  double scale = 1.0;
  for (int x = 0; x < n; ++x) {
    double d = form.kappa(x);
    for (const DiscreteForm::Neighbor& nb : form.neighbors(x)) d += 2.0 * nb.j;
    if (!(d > 0.0)) {
      throw SolverError("excessive_majorant: zero diagonal (isolated node " +
                        std::to_string(x) + ")");
    }
    diag[x] = d;
    b[x] = -penalty * form.space().volume(x) * g[x];
    scale = std::max(scale, std::abs(h[x]));
  }

  std::vector<double> v(h.begin(), h.end());
  const double omega = config.relaxation;
  for (long sweep = 0; sweep < config.max_sweeps; ++sweep) {
    double max_update = 0.0;
    for (int x = 0; x < n; ++x) {
      double r = b[x];
      for (const DiscreteForm::Neighbor& nb : form.neighbors(x)) {
        r += 2.0 * nb.j * v[nb.node];
      }
      const double gs = r / diag[x];
      const double cand = std::max(h[x], v[x] + omega * (gs - v[x]));
      max_update = std::max(max_update, std::abs(cand - v[x]));
      v[x] = cand;
    }
    if (max_update <= config.tolerance * scale) return v;
  }
  throw SolverError("excessive_majorant: PSOR did not converge in " +
                    std::to_string(config.max_sweeps) + " sweeps");
}

PotentialIdentityReport verify_potential_identities(
    const GreenOperator& green, const SignedMeasure& mu,
    const std::vector<std::pair<std::string, std::vector<double>>>& etas) {
  const DiscreteForm& form = green.form();
  const int n = form.size();
  const std::vector<double> u = green.apply(mu);

  PotentialIdentityReport report;
  for (const auto& [name, eta] : etas) {
    if (static_cast<int>(eta.size()) != n) {
      throw ConfigError("verify_potential_identities: eta has wrong length");
    }
    PotentialIdentityRow row;
    row.eta_name = name;

    // duality: <u, eta>_m vs <mu, R eta>
    double lhs = 0.0;
    for (int x = 0; x < n; ++x) lhs += u[x] * eta[x] * form.space().volume(x);
    const std::vector<double> r_eta = green.resolvent(0.0, eta);
    const double rhs = mu.pair(r_eta);
    row.duality_residual = std::abs(lhs - rhs);

    // very weak: <u, -A eta>_m = u^T L eta vs <mu, eta>
    const std::vector<double> l_eta = form.apply_stiffness(eta);
    double vw = 0.0;
    for (int x = 0; x < n; ++x) vw += u[x] * l_eta[x];
    row.very_weak_residual = std::abs(vw - mu.pair(eta));

    row.scale = std::max({1.0, std::abs(lhs), std::abs(rhs), mu.tv_norm()});
    report.max_relative_residual =
        std::max(report.max_relative_residual,
                 std::max(row.duality_residual, row.very_weak_residual) / row.scale);
    report.rows.push_back(std::move(row));
  }
  return report;
}

double smallest_eigenvalue(const GreenOperator& green, int iterations) {
  const int n = green.form().size();
  std::vector<double> v(n, 1.0);
  double lambda_inv = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> w = green.solve(v);
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw SolverError("power iteration collapsed");
    lambda_inv = norm;
    for (int i = 0; i < n; ++i) v[i] = w[i] / norm;
  }
  // ||L^{-1}|| ~ lambda_inv, so lambda_min(L) ~ 1 / lambda_inv.
  return 1.0 / lambda_inv;
}

}  // namespace renormlab
