#include "hris/energy.hpp"

#include <cmath>

namespace hris {

HarvesterModel::HarvesterModel(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
  if (!(c > 0.0)) throw EnergyError("harvester constant c must be positive");
  if (a * c < b) throw EnergyError("harvester constants must satisfy a*c >= b");
}

double harvest(const HarvesterModel& model, double p_in) {
  if (p_in < 0.0) throw EnergyError("harvest: negative input power");
  // Algebraically equal to (a x + b)/(x + c) - b/c, without the cancellation at x -> 0.
  return p_in * (model.a * model.c - model.b) / (model.c * (p_in + model.c));
}

void ConsumptionModel::validate() const {
  if (p_on < 0.0 || controller_run < 0.0 || controller_idle < 0.0)
    throw EnergyError("consumption powers must be non-negative");
  if (bits < 1 || bits > 30) throw EnergyError("quantization bits must be in [1, 30]");
}

double atom_consumption(unsigned m, const ConsumptionModel& model) {
  if (m >= (1u << model.bits)) throw EnergyError("phase index out of range");
  unsigned active = m;
  for (int i = 1; i <= model.bits; ++i) active -= m >> i;
  return model.p_on * active;
}

double config_consumption(const HrisConfig& config, const ConsumptionModel& model) {
  if (!config.bits) throw EnergyError("config_consumption: configuration is not quantized");
  if (*config.bits != model.bits)
    throw EnergyError("config_consumption: bit depth differs from the hardware model");
  double total = 0.0;
  for (unsigned m : phase_indices(config)) total += atom_consumption(m, model);
  return total;
}

void FramePlan::validate() const {
  if (n_ce < 1) throw EnergyError("frame needs at least one probing slot");
  if (n_dl < 0 || n_ul < 0) throw EnergyError("slot counts must be non-negative");
  if (!(period > 0.0)) throw EnergyError("reconfiguration period must be positive");
  if (traffic < 0.0 || traffic > 1.0) throw EnergyError("traffic must lie in [0, 1]");
}

FrameEnergy frame_energy(const FramePlan& plan, const HarvesterModel& harvester,
                         const ConsumptionModel& consumption, double p_abs_bs, double p_abs_ue,
                         const FrameConfigs& configs, bool idle, double nu) {
  plan.validate();
  if (!(nu > 0.0 && nu <= 1.0)) throw EnergyError("idle fraction must lie in (0, 1]");

  const double slot = plan.slot_duration();
  double harvested = plan.traffic * slot *
                     (plan.n_dl * harvest(harvester, p_abs_bs) +
                      plan.n_ul * harvest(harvester, p_abs_ue));
  if (idle) harvested *= nu;

  double power = idle ? consumption.controller_idle : consumption.controller_run;
  if (!idle) {
    if (configs.reflection) power += config_consumption(*configs.reflection, consumption);
    const int comm_slots = plan.n_dl + plan.n_ul;
    if (comm_slots > 0) {
      double absorb = 0.0;
      if (configs.absorption_bs)
        absorb += plan.n_dl * config_consumption(*configs.absorption_bs, consumption);
      if (configs.absorption_ue)
        absorb += plan.n_ul * config_consumption(*configs.absorption_ue, consumption);
      power += absorb / comm_slots;
    }
  }
  return {harvested, plan.period * power};
}

double idle_fraction(std::size_t nx, std::size_t nz, double spacing_over_wavelength) {
  if (nx == 0 || nz == 0 || !(spacing_over_wavelength > 0.0))
    throw EnergyError("idle_fraction: invalid array");
  const double bx = 1.0 / (static_cast<double>(nx) * spacing_over_wavelength);
  const double by = 1.0 / (static_cast<double>(nz) * spacing_over_wavelength);
  return bx * by / (kPi * kPi);
}

}  // namespace hris
