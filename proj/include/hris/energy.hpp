#pragma once

#include "hris/hris.hpp"

namespace hris {

class EnergyError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// RF-to-DC law f(x) = (a x + b) / (x + c) - b / c.
struct HarvesterModel {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;

  HarvesterModel() = default;
  /// Throws EnergyError unless c > 0 and a c >= b (f monotone).
  HarvesterModel(double a, double b, double c);

  double saturation() const { return a - b / c; }
};

double harvest(const HarvesterModel& model, double p_in);

struct ConsumptionModel {
  double p_on = 0.1e-3;           // W per active PIN diode
  int bits = 2;                   // diodes per meta-atom
  double controller_run = 4.9e-3; // W
  double controller_idle = 1.8e-3;// W

  void validate() const;
};

/// Power drawn by one meta-atom set to phase index m (binary diode pattern m).
double atom_consumption(unsigned m, const ConsumptionModel& model);

/// Sum of atom_consumption over the phase indices of a quantized configuration.
double config_consumption(const HrisConfig& config, const ConsumptionModel& model);

/// TDD frame: one reconfiguration period of n_ce + n_dl + n_ul equal slots.
struct FramePlan {
  int n_dl = 8;
  int n_ul = 3;
  int n_ce = 1;
  double period = 10e-3;  // s
  double traffic = 0.5;   // EH duty factor in [0, 1]

  void validate() const;
  int slots() const { return n_ce + n_dl + n_ul; }
  double slot_duration() const { return period / slots(); }
};

struct FrameEnergy {
  double harvested = 0.0;  // J
  double consumed = 0.0;   // J
  double net() const { return harvested - consumed; }
};

struct FrameConfigs {
  const HrisConfig* reflection = nullptr;
  const HrisConfig* absorption_bs = nullptr;
  const HrisConfig* absorption_ue = nullptr;
};

/// Energy harvested and consumed over one reconfiguration period.
///
/// Harvesting happens in the communication slots only: each DL (UL) slot
/// contributes traffic * slot_duration * f(p_abs_bs) (f(p_abs_ue)). The
/// absorption bank holds the BS configuration during DL slots and the UE
/// configuration during UL slots, and its diode draw is slot-averaged over the
/// period. In idle mode the harvest is scaled by nu, the phase shifters are
/// off and the controller draws its idle power.
FrameEnergy frame_energy(const FramePlan& plan, const HarvesterModel& harvester,
                         const ConsumptionModel& consumption, double p_abs_bs, double p_abs_ue,
                         const FrameConfigs& configs, bool idle, double nu);

/// Idle-beam harvesting fraction B_x B_y / pi^2 with B = 1 / (N delta), delta = d / lambda.
double idle_fraction(std::size_t nx, std::size_t nz, double spacing_over_wavelength);

}  // namespace hris
