#include "renormlab/mc.hpp"

#include <algorithm>
#include <cmath>

#include "renormlab/errors.hpp"

namespace renormlab {

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix(state_);
}

double SplitMix64::next_double() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t SplitMix64::path_key(std::uint64_t seed, std::uint64_t index) {
  return mix(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

bool McEstimate::within(double n_sigma) const {
  if (!has_reference) return true;
  if (n <= 1) return true;  // insufficient paths: wide CI, not a failure
  return std::abs(mean - reference) <= n_sigma * std_error;
}

namespace {

// Precomputed per-node jump table: cumulative rates with the killing rate
// appended last, all divided by m(x).
struct ChainTable {
  std::vector<int> offsets;
  std::vector<int> targets;       // -1 marks the cemetery
  std::vector<double> cum_rates;  // cumulative, same layout as targets
  std::vector<double> total_rate; // per node
};

ChainTable build_table(const DiscreteForm& form) {
  ChainTable t;
  const int n = form.size();
  t.offsets.assign(n + 1, 0);
  for (int x = 0; x < n; ++x) {
    t.offsets[x + 1] = t.offsets[x] + static_cast<int>(form.neighbors(x).size()) + 1;
  }
  t.targets.resize(t.offsets[n]);
  t.cum_rates.resize(t.offsets[n]);
  t.total_rate.resize(n);
  for (int x = 0; x < n; ++x) {
    const double m = form.space().volume(x);
    int pos = t.offsets[x];
    double cum = 0.0;
    for (const DiscreteForm::Neighbor& nb : form.neighbors(x)) {
      cum += 2.0 * nb.j / m;
      t.targets[pos] = nb.node;
      t.cum_rates[pos] = cum;
      ++pos;
    }
    cum += form.kappa(x) / m;
    t.targets[pos] = -1;
    t.cum_rates[pos] = cum;
    t.total_rate[x] = cum;
    if (!(cum > 0.0)) {
      throw ConfigError("chain has an absorbing interior node " + std::to_string(x) +
                        " (zero total rate); the form is not transient");
    }
  }
  return t;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

struct PathAccumulator {
  const Functional* fn;
  double value = 0.0;
  bool frozen = false;

  void reset() {
    value = 0.0;
    frozen = false;
  }
};

}  // namespace

std::vector<McEstimate> simulate(const DiscreteForm& form, const McConfig& config,
                                 std::span<const Functional> functionals) {
  if (config.n_paths < 1) throw ConfigError("n_paths must be >= 1");
  const int n = form.size();
  if (config.start_distribution.empty()) {
    if (config.start_node < 0 || config.start_node >= n) {
      throw ConfigError("start node out of range");
    }
  } else if (static_cast<int>(config.start_distribution.size()) != n) {
    throw ConfigError("start distribution has wrong length");
  }
  for (const Functional& f : functionals) {
    auto check = [&](const std::vector<double>& v, const char* what) {
      if (!v.empty() && static_cast<int>(v.size()) != n) {
        throw ConfigError(std::string("functional '") + f.name + "': " + what +
                          " has wrong length");
      }
    };
    check(f.weight, "weight");
    check(f.measure_masses, "measure");
    check(f.region_u, "region function");
    const bool needs_region = f.kind == Functional::Kind::exit_value ||
                              f.kind == Functional::Kind::optional_stopping;
    if (needs_region && f.region_u.empty()) {
      throw ConfigError(std::string("functional '") + f.name +
                        "': exit functionals need the region function u");
    }
    const bool needs_measure = f.kind == Functional::Kind::weighted_atom_time ||
                               f.kind == Functional::Kind::optional_stopping;
    if (needs_measure && f.measure_masses.empty()) {
      throw ConfigError(std::string("functional '") + f.name +
                        "': additive functionals need measure masses");
    }
  }

  const ChainTable table = build_table(form);
  const std::size_t n_fn = functionals.size();
  std::vector<std::vector<double>> per_path(n_fn);
  for (auto& v : per_path) v.resize(config.n_paths);
  long n_capped = 0;

  std::vector<PathAccumulator> acc(n_fn);
  for (std::size_t i = 0; i < n_fn; ++i) acc[i].fn = &functionals[i];

  double start_total = 0.0;
  for (double w : config.start_distribution) {
    if (w < 0.0) throw ConfigError("start distribution must be nonnegative");
    start_total += w;
  }

  for (long path = 0; path < config.n_paths; ++path) {
    SplitMix64 rng(SplitMix64::path_key(config.seed, static_cast<std::uint64_t>(path)));
    int x;
    if (config.start_distribution.empty()) {
      x = config.start_node;
    } else {
      const double pick = rng.next_double() * start_total;
      double cum = 0.0;
      x = n - 1;
      for (int i = 0; i < n; ++i) {
        cum += config.start_distribution[i];
        if (pick < cum) {
          x = i;
          break;
        }
      }
    }
    for (auto& a : acc) a.reset();

    // Exit functionals with the start already outside the region stop at t=0.
    for (auto& a : acc) {
      const Functional& f = *a.fn;
      if ((f.kind == Functional::Kind::exit_value ||
           f.kind == Functional::Kind::optional_stopping) &&
          !f.region_u.empty() && std::abs(f.region_u[x]) >= f.level) {
        a.value = f.region_u[x];
        a.frozen = true;
      }
    }

    double t = 0.0;
    bool capped = false;
    while (x >= 0) {
      const double rate = table.total_rate[x];
      double hold = -std::log1p(-rng.next_double()) / rate;
      if (t + hold > config.max_time) {
        hold = config.max_time - t;
        capped = true;
      }
      const double m = form.space().volume(x);
      for (auto& a : acc) {
        if (a.frozen) continue;
        const Functional& f = *a.fn;
        const double w = f.weight.empty() ? 1.0 : f.weight[x];
        switch (f.kind) {
          case Functional::Kind::occupation:
            a.value += w * hold;
            break;
          case Functional::Kind::weighted_atom_time:
            a.value += w * (f.measure_masses[x] / m) * hold;
            break;
          case Functional::Kind::optional_stopping:
            a.value += (f.measure_masses[x] / m) * hold;
            break;
          case Functional::Kind::lifetime:
            a.value += hold;
            break;
          case Functional::Kind::exit_value:
            break;
        }
      }
      t += hold;
      if (capped) break;

      // next state: cumulative-rate table walk (cemetery last)
      const double pick = rng.next_double() * rate;
      int next = -1;
      for (int pos = table.offsets[x]; pos < table.offsets[x + 1]; ++pos) {
        if (pick < table.cum_rates[pos]) {
          next = table.targets[pos];
          break;
        }
      }
      x = next;

      for (auto& a : acc) {
        if (a.frozen) continue;
        const Functional& f = *a.fn;
        if (f.kind == Functional::Kind::exit_value ||
            f.kind == Functional::Kind::optional_stopping) {
          const bool exited = x < 0 || std::abs(f.region_u[x]) >= f.level;
          if (exited) {
            a.value += x < 0 ? 0.0 : f.region_u[x];
            a.frozen = true;
          }
        }
      }
    }
    if (capped) ++n_capped;
    for (std::size_t i = 0; i < n_fn; ++i) per_path[i][path] = acc[i].value;
  }

  std::vector<McEstimate> out(n_fn);
  for (std::size_t i = 0; i < n_fn; ++i) {
    McEstimate& e = out[i];
    e.name = functionals[i].name;
    e.n = config.n_paths;
    e.n_capped = n_capped;
    const double sum = pairwise_sum(per_path[i]);
    e.mean = sum / config.n_paths;
    if (config.n_paths > 1) {
      std::vector<double> sq(per_path[i].size());
      for (std::size_t p = 0; p < sq.size(); ++p) {
        const double d = per_path[i][p] - e.mean;
        sq[p] = d * d;
      }
      const double var = pairwise_sum(sq) / (config.n_paths - 1);
      e.std_error = std::sqrt(var / config.n_paths);
    }
  }
  return out;
}

McEstimate revuz_check(const DiscreteForm& form, const GreenOperator& green,
                       const SignedMeasure& mu, std::span<const double> eta,
                       int start, const McConfig& config) {
  for (int x = 0; x < mu.size(); ++x) {
    if (mu.mass(x) < 0.0) throw ConfigError("revuz_check needs mu >= 0");
  }
  Functional f;
  f.kind = Functional::Kind::weighted_atom_time;
  f.name = "revuz";
  f.weight.assign(eta.begin(), eta.end());
  f.measure_masses = mu.masses();
  McConfig cfg = config;
  cfg.start_node = start;
  cfg.start_distribution.clear();
  McEstimate est = simulate(form, cfg, {&f, 1})[0];

  SignedMeasure eta_mu(mu.size());
  for (int x = 0; x < mu.size(); ++x) {
    const double w = eta.empty() ? 1.0 : eta[x];
    if (mu.mass(x) != 0.0) eta_mu.set(x, w * mu.mass(x), MassTag::untagged);
  }
  est.reference = green.apply(eta_mu)[start];
  est.has_reference = true;
  return est;
}

DynkinResult dynkin_check(const DiscreteForm& form, const GreenOperator& green,
                          std::span<const double> u, const SignedMeasure& mu,
                          double k, int start, const McConfig& config) {
  if (!(k > 0.0)) throw ConfigError("dynkin_check: level k must be > 0");
  auto [mu_d, mu_c] = mu.decompose();

  Functional stopping;
  stopping.kind = Functional::Kind::optional_stopping;
  stopping.name = "optional-stopping";
  stopping.measure_masses = mu_d.masses();
  stopping.region_u.assign(u.begin(), u.end());
  stopping.level = k;

  Functional exit_fn;
  exit_fn.kind = Functional::Kind::exit_value;
  exit_fn.name = "exit-value";
  exit_fn.region_u.assign(u.begin(), u.end());
  exit_fn.level = k;

  McConfig cfg = config;
  cfg.start_node = start;
  cfg.start_distribution.clear();
  const Functional fns[2] = {stopping, exit_fn};
  std::vector<McEstimate> est = simulate(form, cfg, fns);

  DynkinResult out;
  out.optional_stopping = est[0];
  out.optional_stopping.reference = u[start];
  out.optional_stopping.has_reference = true;
  out.exit_value = est[1];
  out.exit_value.reference = green.apply(mu_c)[start];
  out.exit_value.has_reference = true;  // recorded as a refinement trend only
  return out;
}

std::vector<HoldingTimeRow> calibrate_holding_times(const DiscreteForm& form,
                                                    const McConfig& config) {
  const int n = form.size();
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  std::vector<long> visits(n, 0);
  const ChainTable table = build_table(form);

  for (long path = 0; path < config.n_paths; ++path) {
    SplitMix64 rng(SplitMix64::path_key(config.seed, static_cast<std::uint64_t>(path)));
    int x = config.start_node;
    double t = 0.0;
    while (x >= 0 && t < config.max_time) {
      const double rate = table.total_rate[x];
      const double hold = -std::log1p(-rng.next_double()) / rate;
      sum[x] += hold;
      sum_sq[x] += hold * hold;
      ++visits[x];
      t += hold;
      const double pick = rng.next_double() * rate;
      int next = -1;
      for (int pos = table.offsets[x]; pos < table.offsets[x + 1]; ++pos) {
        if (pick < table.cum_rates[pos]) {
          next = table.targets[pos];
          break;
        }
      }
      x = next;
    }
  }

  std::vector<HoldingTimeRow> rows;
  for (int x = 0; x < n; ++x) {
    if (visits[x] == 0) continue;
    HoldingTimeRow row;
    row.node = x;
    row.visits = visits[x];
    row.expected_mean = 1.0 / table.total_rate[x];
    row.empirical_mean = sum[x] / visits[x];
    if (visits[x] > 1) {
      const double var =
          (sum_sq[x] - sum[x] * sum[x] / visits[x]) / (visits[x] - 1);
      row.std_error = std::sqrt(std::max(var, 0.0) / visits[x]);
    }
    rows.push_back(row);
  }
  return rows;
}

BatteryResult identity_battery(const DiscreteForm& form, const GreenOperator& green,
                               const SignedMeasure& mu, std::span<const double> u,
                               double k, int start, const McConfig& config,
                               int n_seeds) {
  BatteryResult out;
  out.n_seeds = n_seeds;
  const SignedMeasure mu_pos = mu.positive_part();
  std::vector<double> ones(form.size(), 1.0);
  for (int s = 0; s < n_seeds; ++s) {
    McConfig cfg = config;
    cfg.seed = config.seed + static_cast<std::uint64_t>(s);
    const McEstimate revuz = revuz_check(form, green, mu_pos, ones, start, cfg);
    const DynkinResult dynkin = dynkin_check(form, green, u, mu, k, start, cfg);
    if (revuz.within() && dynkin.optional_stopping.within()) ++out.n_passed;
  }
  return out;
}

}  // namespace renormlab
