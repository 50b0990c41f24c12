#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hris/channel.hpp"

namespace hris {

class BatteryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ReducibleChainError : public BatteryError {
public:
  ReducibleChainError(const std::string& what, std::vector<std::size_t> closed_class)
      : BatteryError(what), closed_class_(std::move(closed_class)) {}
  const std::vector<std::size_t>& closed_class() const { return closed_class_; }

private:
  std::vector<std::size_t> closed_class_;
};

inline constexpr double kDefaultBatteryVoltage = 3.7;

/// Charge in mAh to energy in J at the given cell voltage.
double mah_to_joules(double mah, double voltage = kDefaultBatteryVoltage);
double joules_to_mah(double joules, double voltage = kDefaultBatteryVoltage);

/// Gaussian net stored energy per chain step, in J.
struct NetEnergyDist {
  double mean = 0.0;
  double std = 1.0;

  NetEnergyDist() = default;
  NetEnergyDist(double mean, double std);

  double cdf(double x) const;
  /// P[lo <= X < hi]; accurate in both tails.
  double interval(double lo, double hi) const;

  /// Moment fit to samples (unbiased variance).
  static NetEnergyDist fit(const std::vector<double>& samples);
};

struct BatteryChain {
  std::size_t n_states = 2;
  double step = 1.0;  // J per state
  Eigen::MatrixXd psi;
  Eigen::VectorXd pi;  // empty until solved
  std::size_t guard_state = 0;
  double voltage = kDefaultBatteryVoltage;

  double capacity() const { return static_cast<double>(n_states - 1) * step; }
};

/// Number of states S such that (S - 1) * delta equals capacity.
std::size_t states_for_capacity(double capacity, double delta);

/// Transition matrix of the quantized state of charge.
///
/// A step of net energy x moves the chain floor(x / delta) states, clipped at
/// both ends; the clipped tails are absorbed into the boundary columns.
BatteryChain build_chain(const NetEnergyDist& dist, std::size_t n_states, double delta,
                         double guard_fraction);

/// Stationary distribution by direct linear solve. Throws ReducibleChainError
/// when the chain has more than one communicating class.
Eigen::VectorXd stationary(const BatteryChain& chain);

/// Stationary distribution by power iteration from the uniform distribution.
/// On a reducible chain this returns the limit reached from that start.
Eigen::VectorXd stationary_power_iteration(const BatteryChain& chain, double tol = 1e-14,
                                           std::size_t max_iter = 10'000'000);

/// Builds and solves in one go.
BatteryChain solved_chain(const NetEnergyDist& dist, std::size_t n_states, double delta,
                          double guard_fraction);

/// Stationary mass at or below the guard state.
double loss_of_charge(const BatteryChain& chain);

struct BatterySizing {
  std::size_t n_states = 0;
  double delta = 0.0;
  double capacity = 0.0;
  double ploc = 0.0;
};

/// Smallest capacity (S - 1) * delta over the delta grid and S in [2, max_states]
/// with p_LoC <= target. Empty when no grid point qualifies.
std::optional<BatterySizing> size_battery(const NetEnergyDist& dist,
                                          const std::vector<double>& delta_grid,
                                          double target_ploc, double guard_fraction,
                                          std::size_t max_states = 200);

struct TraceResult {
  double empirical_ploc = 0.0;
  double standard_error = 0.0;  // batch means
  std::vector<double> soc;      // J, every record_every-th period
};

struct TraceOptions {
  std::size_t n_periods = 1000;
  std::size_t record_every = 1;
  std::size_t batches = 100;
};

/// Simulates the quantized chain directly: each period draws x from dist and
/// moves floor(x / delta) states, clipped to [0, S-1].
TraceResult simulate_trace(const NetEnergyDist& dist, std::size_t n_states, double delta,
                           double guard_fraction, std::size_t start_state,
                           const TraceOptions& opts, Rng& rng);

/// Net energy of one period in active and in idle mode, in J.
struct PeriodEnergy {
  double active = 0.0;
  double idle = 0.0;
};

using EnergySource = std::function<PeriodEnergy(std::size_t period, Rng& rng)>;

/// Continuous state-of-charge trace driven by a per-period energy source.
///
/// The charge is clipped to [0, capacity]. At or below the guard level the
/// HRIS switches to idle mode and leaves it once the charge rises above the
/// next state boundary.
TraceResult simulate_trace(const EnergySource& source, double capacity, double delta,
                           double guard_fraction, double start_soc, const TraceOptions& opts,
                           Rng& rng);

}  // namespace hris
