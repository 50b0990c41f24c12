#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hris/battery.hpp"
#include "hris/comm.hpp"
#include "hris/scenario.hpp"

namespace hris {

struct RunOptions {
  unsigned threads = 1;
};

/// Independent RNG stream for (seed, stream tag, index). Results never depend
/// on the order in which drops are scheduled.
Rng stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// UE positions and channel realization for one Monte-Carlo drop.
ChannelSet realize_drop(const Scenario& sc, const ArrayGeometry& ris, std::size_t n_ues,
                        std::uint64_t drop);

/// Configurations produced by the probing phase for one drop.
struct AresOutcome {
  ProbeResult bs_probe;
  ProbeResult ue_probe;
  HrisConfig reflection;
  double p_abs_bs = 0.0;  // W, sensed on the BS configuration
  double p_abs_ue = 0.0;  // W, sensed on the UE configuration
};

/// Signal impinging on the HRIS from the BS beam toward it, G w_R.
CVector bs_incident(const Scenario& sc, const ChannelSet& ch);
/// Signal impinging from all UEs transmitting simultaneously, sqrt(P) sum h_k.
CVector ue_incident(const Scenario& sc, const ChannelSet& ch);

AresOutcome run_ares(const Scenario& sc, const ChannelSet& ch, const Codebook& codebook);

/// Reflection configuration of a named scheme (idle, O-ARES, O-wARES, wARES-Q1, wARES-Q2).
HrisConfig scheme_reflection(const Scenario& sc, const ChannelSet& ch, const std::string& scheme,
                             const std::map<int, Codebook>& codebooks);

/// RZF precoding on the effective channels and link evaluation.
LinkBudget evaluate_scheme(const Scenario& sc, const ChannelSet& ch, const HrisConfig& theta);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Named CSV tables; emit_csv writes <dir>/<name>.csv for each.
struct RunReport {
  std::vector<std::pair<std::string, CsvTable>> tables;

  const CsvTable& table(const std::string& name) const;
};

void emit_csv(const CsvTable& table, const std::filesystem::path& path);
void emit_csv(const RunReport& report, const std::filesystem::path& dir);
std::string format_number(double v);

struct MeanCi {
  double mean = 0.0;
  double ci95 = 0.0;  // half-width
  std::size_t n = 0;
};
MeanCi mean_ci(const std::vector<double>& xs);

// ---- sum-rate ----

struct SumrateResult {
  std::vector<std::string> schemes;
  std::vector<std::size_t> ue_counts;
  // rate[scheme][k_index][drop]
  std::vector<std::vector<std::vector<double>>> rate;
  // direct-path power fractions at K = n_ues: fraction[scheme] over (drop, ue)
  std::vector<std::vector<double>> direct_fraction;

  MeanCi summary(const std::string& scheme, std::size_t k) const;
  RunReport report(const Scenario& sc) const;
};

SumrateResult run_sumrate_experiment(const Scenario& sc, const RunOptions& opts = {});

// ---- harvested and consumed power ----

struct EnergyPoint {
  std::size_t nx = 0, nz = 0;
  int bits = 0;
  double traffic = 0.0;
  double p_on_mw = 0.0;
  std::vector<double> harvested_w;  // per drop
  std::vector<double> consumed_w;   // per drop
};

struct EnergyResult {
  std::vector<EnergyPoint> points;

  const EnergyPoint& at(std::size_t nx, int bits, double traffic, double p_on_mw) const;
  RunReport report(const Scenario& sc) const;
};

EnergyResult run_energy_experiment(const Scenario& sc, const RunOptions& opts = {});

// ---- battery sizing ----

struct PlocPoint {
  double p_on_mw = 0.0;
  double capacity_mah = 0.0;
  std::size_t n_states = 0;
  NetEnergyDist dist;
  double ploc_theory = 0.0;
  double ploc_empirical = 0.0;
  double standard_error = 0.0;
};

struct SizingPoint {
  double p_on_mw = 0.0;
  NetEnergyDist dist;
  std::optional<BatterySizing> sizing;
};

struct SocTrace {
  double traffic = 0.0;
  double capacity_mah = 0.0;
  std::vector<double> soc_mah;
  double idle_fraction = 0.0;
};

struct BatteryResult {
  std::vector<PlocPoint> ploc;
  std::vector<SizingPoint> sizing;
  std::vector<SocTrace> traces;
  // Mean per-period active net energy per (p_on, traffic), J.
  std::map<std::pair<double, double>, double> mean_period_net;

  RunReport report(const Scenario& sc) const;
};

BatteryResult run_battery_experiment(const Scenario& sc, const RunOptions& opts = {});

}  // namespace hris
