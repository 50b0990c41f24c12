#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hris/battery.hpp"
#include "hris/channel.hpp"
#include "hris/energy.hpp"
#include "hris/hris.hpp"

namespace hris {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One experiment: deployment, radio, traffic, hardware and battery parameters
/// plus the sweeps the experiments iterate over. Units follow the key names in
/// the JSON file (dBm, mW, mAh); accessors convert to SI.
struct Scenario {
  // Radio and geometry
  double tx_power_dbm = 20.0;
  std::size_t bs_antennas = 4;
  std::size_t ris_nx = 8;
  std::size_t ris_nz = 4;
  double carrier_hz = 28e9;
  double element_spacing_wavelengths = 0.5;
  std::array<double, 3> bs_position{-25.0, 25.0, 6.0};
  std::array<double, 3> ris_position{0.0, 0.0, 6.0};
  std::array<double, 2> area_m{50.0, 50.0};
  double ue_height = 1.5;

  // Propagation
  double chi_los = 2.0;
  double chi_nlos = 4.0;
  double noise_dbm = -80.0;
  double d0 = 1.0;
  double gamma0 = 1.0;
  double blocker_density = 0.3;
  double blocker_height = 1.8;
  double blocker_diameter = 0.6;
  std::string blockage_mode = "analytic";
  bool blockage_enabled = true;
  bool bs_ris_blockable = false;

  // HRIS and probing
  double eta = 0.8;
  std::size_t codebook_size = 32;
  std::size_t codebook_az = 8;
  std::size_t codebook_el = 4;
  int quantization_bits = 2;
  double threshold_factor = 2.0;
  std::string combining = "soft";

  // Frame and traffic
  double traffic = 0.5;
  int n_dl = 8;
  int n_ul = 3;
  int n_ce = 1;
  double period_s = 0.01;

  // Hardware consumption and harvester
  double p_on_mw = 0.1;
  double controller_run_mw = 4.9;
  double controller_idle_mw = 1.8;
  double harvester_a = 0.0;
  double harvester_b = 0.0;
  double harvester_c = 0.0;

  // Battery
  double capacity_mah = 400.0;
  double delta_mah = 20.0;
  double guard = 0.1;
  double battery_voltage = 3.7;
  double periods_per_step = 1.0;  // reconfiguration periods per chain step
  double soc_trace_step_periods = 1.0;  // periods per recorded SoC sample

  // Monte-Carlo and sweeps
  std::size_t n_ues = 75;
  std::size_t n_drops = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> schemes;
  std::vector<std::size_t> ue_sweep;
  std::vector<std::size_t> ris_nx_sweep;
  std::vector<int> bits_sweep;
  std::vector<double> traffic_sweep;
  std::vector<double> p_on_sweep_mw;
  std::vector<double> capacity_sweep_mah;
  std::vector<double> delta_grid_mah;
  double target_ploc = 0.01;
  std::size_t battery_ris_nx = 10;
  std::size_t trace_periods = 1'000'000;
  std::size_t soc_trace_steps = 2000;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  double tx_power_w() const;
  double noise_w() const;
  Radio radio() const;
  PathlossModel pathloss_model() const;
  BlockageField blockage_field() const;
  HarvesterModel harvester() const;
  ConsumptionModel consumption(int bits, double p_on_mw) const;
  FramePlan frame_plan(double traffic) const;
  ArrayGeometry bs_array() const;
  ArrayGeometry ris_array(std::size_t nx, std::size_t nz) const;
  Combining combining_mode() const;
};

/// Reference scenario defaults with the repository's harvester calibration.
Scenario default_scenario();

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

bool operator==(const Scenario& a, const Scenario& b);

}  // namespace hris
