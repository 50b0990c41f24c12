#include "hris/battery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace hris {

double mah_to_joules(double mah, double voltage) { return mah * 3.6 * voltage; }
double joules_to_mah(double joules, double voltage) { return joules / (3.6 * voltage); }

NetEnergyDist::NetEnergyDist(double mean_, double std_) : mean(mean_), std(std_) {
  if (!(std > 0.0) || !std::isfinite(std) || !std::isfinite(mean))
    throw BatteryError("net energy distribution needs a finite positive std");
}

double NetEnergyDist::cdf(double x) const {
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  return 0.5 * std::erfc(-(x - mean) / (std * std::sqrt(2.0)));
}

double NetEnergyDist::interval(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  if (lo >= mean) {
    // Upper tail: difference of survival functions avoids 1 - 1 cancellation.
    auto sf = [&](double x) {
      if (x == std::numeric_limits<double>::infinity()) return 0.0;
      return 0.5 * std::erfc((x - mean) / (std * std::sqrt(2.0)));
    };
    return sf(lo) - sf(hi);
  }
  return cdf(hi) - cdf(lo);
}

NetEnergyDist NetEnergyDist::fit(const std::vector<double>& samples) {
  if (samples.size() < 2) throw BatteryError("need at least two samples to fit");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return NetEnergyDist(mean, std::sqrt(ss / (n - 1.0)));
}

std::size_t states_for_capacity(double capacity, double delta) {
  if (!(delta > 0.0) || !(capacity > 0.0)) throw BatteryError("capacity and delta must be positive");
  const double steps = capacity / delta;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
    throw BatteryError("capacity is not a whole number of delta steps");
  return static_cast<std::size_t>(rounded) + 1;
}

BatteryChain build_chain(const NetEnergyDist& dist, std::size_t n_states, double delta,
                         double guard_fraction) {
  if (n_states < 2) throw BatteryError("a battery chain needs at least two states");
  if (!(delta > 0.0)) throw BatteryError("delta must be positive");
  if (!(guard_fraction >= 0.0 && guard_fraction <= 1.0))
    throw BatteryError("guard fraction must lie in [0, 1]");

  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto s = static_cast<Eigen::Index>(n_states);
  BatteryChain chain;
  chain.n_states = n_states;
  chain.step = delta;
  chain.guard_state =
      static_cast<std::size_t>(std::floor(guard_fraction * static_cast<double>(n_states - 1)));
  chain.psi = Eigen::MatrixXd::Zero(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) {
      const double lo = j == 0 ? -inf : static_cast<double>(j - i) * delta;
      const double hi = j == s - 1 ? inf : static_cast<double>(j - i + 1) * delta;
      chain.psi(i, j) = dist.interval(lo, hi);
    }
    const double row = chain.psi.row(i).sum();
    if (std::abs(row - 1.0) > 1e-12 || (chain.psi.row(i).array() < 0.0).any()) {
      std::ostringstream msg;
      msg << "row " << i << " of the transition matrix is not stochastic (sum " << row << ")";
      throw BatteryError(msg.str());
    }
  }
  return chain;
}

namespace {

// Closed communicating class reached first from state 0, or empty when the
// chain is irreducible.
std::vector<std::size_t> closed_class_if_reducible(const Eigen::MatrixXd& psi) {
  const auto s = static_cast<std::size_t>(psi.rows());
  std::vector<std::vector<char>> reach(s, std::vector<char>(s, 0));
  for (std::size_t i = 0; i < s; ++i) {
    reach[i][i] = 1;
    for (std::size_t j = 0; j < s; ++j) {
      if (psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) reach[i][j] = 1;
    }
  }
  for (std::size_t k = 0; k < s; ++k)
    for (std::size_t i = 0; i < s; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < s; ++j)
          if (reach[k][j]) reach[i][j] = 1;

  bool irreducible = true;
  for (std::size_t i = 0; i < s && irreducible; ++i)
    for (std::size_t j = 0; j < s; ++j)
      if (!reach[i][j]) {
        irreducible = false;
        break;
      }
  if (irreducible) return {};

  // A state i is in a closed class when every state it reaches reaches it back.
  for (std::size_t i = 0; i < s; ++i) {
    bool closed = true;
    for (std::size_t j = 0; j < s; ++j)
      if (reach[i][j] && !reach[j][i]) {
        closed = false;
        break;
      }
    if (!closed) continue;
    std::vector<std::size_t> cls;
    for (std::size_t j = 0; j < s; ++j)
      if (reach[i][j]) cls.push_back(j);
    return cls;
  }
  return {0};
}

void clean_distribution(Eigen::VectorXd& pi) {
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
}

}  // namespace

Eigen::VectorXd stationary(const BatteryChain& chain) {
  const auto cls = closed_class_if_reducible(chain.psi);
  if (!cls.empty()) {
    std::ostringstream msg;
    msg << "reducible chain: closed class {";
    for (std::size_t i = 0; i < cls.size(); ++i) msg << (i ? "," : "") << cls[i];
    msg << "}";
    throw ReducibleChainError(msg.str(), cls);
  }
  const auto s = chain.psi.rows();
  Eigen::MatrixXd a = chain.psi.transpose() - Eigen::MatrixXd::Identity(s, s);
  a.row(s - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s);
  rhs(s - 1) = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  clean_distribution(pi);
  // One refinement sweep keeps the residual at rounding level.
  for (int it = 0; it < 2; ++it) {
    Eigen::VectorXd next = chain.psi.transpose() * pi;
    clean_distribution(next);
    pi = next;
  }
  return pi;
}

Eigen::VectorXd stationary_power_iteration(const BatteryChain& chain, double tol,
                                           std::size_t max_iter) {
  const auto s = chain.psi.rows();
  const Eigen::MatrixXd pt = chain.psi.transpose();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(s, 1.0 / static_cast<double>(s));
  for (std::size_t it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next = pt * pi;
    next /= next.sum();
    const double change = (next - pi).lpNorm<Eigen::Infinity>();
    pi = std::move(next);
    if (change < tol) break;
  }
  return pi;
}

BatteryChain solved_chain(const NetEnergyDist& dist, std::size_t n_states, double delta,
                          double guard_fraction) {
  BatteryChain chain = build_chain(dist, n_states, delta, guard_fraction);
  chain.pi = stationary(chain);
  return chain;
}

double loss_of_charge(const BatteryChain& chain) {
  if (chain.pi.size() != static_cast<Eigen::Index>(chain.n_states))
    throw BatteryError("loss_of_charge: stationary distribution not computed");
  return chain.pi.head(static_cast<Eigen::Index>(chain.guard_state + 1)).sum();
}

std::optional<BatterySizing> size_battery(const NetEnergyDist& dist,
                                          const std::vector<double>& delta_grid,
                                          double target_ploc, double guard_fraction,
                                          std::size_t max_states) {
  if (delta_grid.empty()) throw BatteryError("size_battery: empty delta grid");
  if (!(target_ploc > 0.0 && target_ploc < 1.0))
    throw BatteryError("size_battery: target must lie in (0, 1)");

  std::optional<BatterySizing> best;
  for (double delta : delta_grid) {
    for (std::size_t s = 2; s <= max_states; ++s) {
      const double capacity = static_cast<double>(s - 1) * delta;
      if (best && capacity >= best->capacity) break;
      BatteryChain chain = build_chain(dist, s, delta, guard_fraction);
      try {
        chain.pi = stationary(chain);
      } catch (const ReducibleChainError&) {
        chain.pi = stationary_power_iteration(chain);
      }
      const double ploc = loss_of_charge(chain);
      if (ploc <= target_ploc) {
        best = BatterySizing{s, delta, capacity, ploc};
        break;
      }
    }
  }
  return best;
}

namespace {

double batch_means_se(const std::vector<char>& hits, std::size_t batches) {
  const std::size_t n = hits.size();
  batches = std::max<std::size_t>(2, std::min(batches, n));
  const std::size_t len = n / batches;
  if (len == 0) return 0.0;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    std::size_t c = 0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) c += static_cast<std::size_t>(hits[i]);
    means[b] = static_cast<double>(c) / static_cast<double>(len);
  }
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double ss = 0.0;
  for (double m : means) ss += (m - mean) * (m - mean);
  return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

}  // namespace

TraceResult simulate_trace(const NetEnergyDist& dist, std::size_t n_states, double delta,
                           double guard_fraction, std::size_t start_state,
                           const TraceOptions& opts, Rng& rng) {
  if (n_states < 2 || !(delta > 0.0)) throw BatteryError("simulate_trace: invalid battery");
  if (opts.n_periods < 1) throw BatteryError("simulate_trace: need at least one period");
  const auto guard =
      static_cast<long>(std::floor(guard_fraction * static_cast<double>(n_states - 1)));
  const auto top = static_cast<long>(n_states - 1);
  long state = std::min(static_cast<long>(start_state), top);

  std::normal_distribution<double> draw(dist.mean, dist.std);
  std::vector<char> hits(opts.n_periods);
  TraceResult out;
  const std::size_t every = std::max<std::size_t>(1, opts.record_every);
  out.soc.reserve(opts.n_periods / every + 1);
  for (std::size_t t = 0; t < opts.n_periods; ++t) {
    const double jump = std::floor(draw(rng) / delta);
    const double next = std::clamp(static_cast<double>(state) + jump, 0.0, static_cast<double>(top));
    state = static_cast<long>(next);
    hits[t] = state <= guard;
    if (t % every == 0) out.soc.push_back(static_cast<double>(state) * delta);
  }
  const auto count = std::count(hits.begin(), hits.end(), 1);
  out.empirical_ploc = static_cast<double>(count) / static_cast<double>(opts.n_periods);
  out.standard_error = batch_means_se(hits, opts.batches);
  return out;
}

TraceResult simulate_trace(const EnergySource& source, double capacity, double delta,
                           double guard_fraction, double start_soc, const TraceOptions& opts,
                           Rng& rng) {
  if (!(capacity > 0.0) || !(delta > 0.0)) throw BatteryError("simulate_trace: invalid battery");
  if (opts.n_periods < 1) throw BatteryError("simulate_trace: need at least one period");
  const std::size_t n_states = states_for_capacity(capacity, delta);
  const auto guard =
      static_cast<long>(std::floor(guard_fraction * static_cast<double>(n_states - 1)));
  const auto top = static_cast<long>(n_states - 1);
  auto state_of = [&](double soc) {
    return std::min(static_cast<long>(std::floor(soc / delta)), top);
  };

  double soc = std::clamp(start_soc, 0.0, capacity);
  bool idle = state_of(soc) <= guard;
  std::vector<char> hits(opts.n_periods);
  TraceResult out;
  const std::size_t every = std::max<std::size_t>(1, opts.record_every);
  out.soc.reserve(opts.n_periods / every + 1);
  for (std::size_t t = 0; t < opts.n_periods; ++t) {
    const PeriodEnergy e = source(t, rng);
    soc = std::clamp(soc + (idle ? e.idle : e.active), 0.0, capacity);
    const long st = state_of(soc);
    // Idle starts inside the guard band and ends one full state above it.
    if (st <= guard) {
      idle = true;
    } else if (idle && st >= guard + 2) {
      idle = false;
    }
    hits[t] = st <= guard;
    if (t % every == 0) out.soc.push_back(soc);
  }
  const auto count = std::count(hits.begin(), hits.end(), 1);
  out.empirical_ploc = static_cast<double>(count) / static_cast<double>(opts.n_periods);
  out.standard_error = batch_means_se(hits, opts.batches);
  return out;
}

}  // namespace hris
