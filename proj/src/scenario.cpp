#include "hris/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hris {

namespace {

template <class Self, class F>
void visit_fields(Self& s, F&& f) {
  f("tx_power_dbm", s.tx_power_dbm);
  f("bs_antennas", s.bs_antennas);
  f("ris_nx", s.ris_nx);
  f("ris_nz", s.ris_nz);
  f("carrier_hz", s.carrier_hz);
  f("element_spacing_wavelengths", s.element_spacing_wavelengths);
  f("bs_position", s.bs_position);
  f("ris_position", s.ris_position);
  f("area_m", s.area_m);
  f("ue_height", s.ue_height);
  f("chi_los", s.chi_los);
  f("chi_nlos", s.chi_nlos);
  f("noise_dbm", s.noise_dbm);
  f("d0", s.d0);
  f("gamma0", s.gamma0);
  f("blocker_density", s.blocker_density);
  f("blocker_height", s.blocker_height);
  f("blocker_diameter", s.blocker_diameter);
  f("blockage_mode", s.blockage_mode);
  f("blockage_enabled", s.blockage_enabled);
  f("bs_ris_blockable", s.bs_ris_blockable);
  f("eta", s.eta);
  f("codebook_size", s.codebook_size);
  f("codebook_az", s.codebook_az);
  f("codebook_el", s.codebook_el);
  f("quantization_bits", s.quantization_bits);
  f("threshold_factor", s.threshold_factor);
  f("combining", s.combining);
  f("traffic", s.traffic);
  f("n_dl", s.n_dl);
  f("n_ul", s.n_ul);
  f("n_ce", s.n_ce);
  f("period_s", s.period_s);
  f("p_on_mw", s.p_on_mw);
  f("controller_run_mw", s.controller_run_mw);
  f("controller_idle_mw", s.controller_idle_mw);
  f("harvester_a", s.harvester_a);
  f("harvester_b", s.harvester_b);
  f("harvester_c", s.harvester_c);
  f("capacity_mah", s.capacity_mah);
  f("delta_mah", s.delta_mah);
  f("guard", s.guard);
  f("battery_voltage", s.battery_voltage);
  f("periods_per_step", s.periods_per_step);
  f("soc_trace_step_periods", s.soc_trace_step_periods);
  f("n_ues", s.n_ues);
  f("n_drops", s.n_drops);
  f("seed", s.seed);
  f("schemes", s.schemes);
  f("ue_sweep", s.ue_sweep);
  f("ris_nx_sweep", s.ris_nx_sweep);
  f("bits_sweep", s.bits_sweep);
  f("traffic_sweep", s.traffic_sweep);
  f("p_on_sweep_mw", s.p_on_sweep_mw);
  f("capacity_sweep_mah", s.capacity_sweep_mah);
  f("delta_grid_mah", s.delta_grid_mah);
  f("target_ploc", s.target_ploc);
  f("battery_ris_nx", s.battery_ris_nx);
  f("trace_periods", s.trace_periods);
  f("soc_trace_steps", s.soc_trace_steps);
}

double dbm_to_w(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError("field '" + field + "': " + why);
}

const std::set<std::string>& known_schemes() {
  static const std::set<std::string> names{"idle", "O-ARES", "O-wARES", "wARES-Q1", "wARES-Q2"};
  return names;
}

}  // namespace

void Scenario::validate() const {
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(name, "must be positive");
  };
  auto unit = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) fail(name, "must lie in [0, 1]");
  };
  if (bs_antennas < 1) fail("bs_antennas", "must be at least 1");
  if (ris_nx < 1) fail("ris_nx", "must be at least 1");
  if (ris_nz < 1) fail("ris_nz", "must be at least 1");
  positive("carrier_hz", carrier_hz);
  positive("element_spacing_wavelengths", element_spacing_wavelengths);
  positive("area_m", std::min(area_m[0], area_m[1]));
  if (ue_height < 0.0) fail("ue_height", "must be non-negative");
  positive("d0", d0);
  positive("gamma0", gamma0);
  if (!(chi_los >= 0.0)) fail("chi_los", "must be non-negative");
  if (!(chi_nlos >= chi_los)) fail("chi_nlos", "must be at least chi_los");
  if (!(blocker_density >= 0.0)) fail("blocker_density", "must be non-negative");
  positive("blocker_height", blocker_height);
  positive("blocker_diameter", blocker_diameter);
  if (blockage_mode != "analytic" && blockage_mode != "sampled")
    fail("blockage_mode", "must be 'analytic' or 'sampled'");
  unit("eta", eta);
  if (codebook_az < 1 || codebook_el < 1) fail("codebook_az", "grid must be non-empty");
  if (codebook_size != codebook_az * codebook_el)
    fail("codebook_size", "must equal codebook_az * codebook_el");
  if (quantization_bits < 1 || quantization_bits > 16) fail("quantization_bits", "must lie in [1, 16]");
  positive("threshold_factor", threshold_factor);
  if (combining != "hard" && combining != "soft") fail("combining", "must be 'hard' or 'soft'");
  unit("traffic", traffic);
  if (n_ce < 1) fail("n_ce", "must be at least 1");
  if (n_dl < 0) fail("n_dl", "must be non-negative");
  if (n_ul < 0) fail("n_ul", "must be non-negative");
  positive("period_s", period_s);
  if (!(p_on_mw >= 0.0)) fail("p_on_mw", "must be non-negative");
  if (!(controller_run_mw >= 0.0)) fail("controller_run_mw", "must be non-negative");
  if (!(controller_idle_mw >= 0.0)) fail("controller_idle_mw", "must be non-negative");
  positive("harvester_c", harvester_c);
  if (harvester_a * harvester_c < harvester_b) fail("harvester_a", "requires a*c >= b");
  positive("capacity_mah", capacity_mah);
  positive("delta_mah", delta_mah);
  try {
    states_for_capacity(capacity_mah, delta_mah);
  } catch (const BatteryError&) {
    fail("capacity_mah", "must be a whole multiple of delta_mah");
  }
  if (!(guard >= 0.0 && guard < 1.0)) fail("guard", "must lie in [0, 1)");
  positive("battery_voltage", battery_voltage);
  positive("periods_per_step", periods_per_step);
  positive("soc_trace_step_periods", soc_trace_step_periods);
  if (n_ues < 1) fail("n_ues", "must be at least 1");
  if (n_drops < 1) fail("n_drops", "must be at least 1");
  for (const auto& name : schemes)
    if (!known_schemes().count(name)) fail("schemes", "unknown scheme '" + name + "'");
  for (auto k : ue_sweep)
    if (k < 1) fail("ue_sweep", "entries must be at least 1");
  for (auto nx : ris_nx_sweep)
    if (nx < 1) fail("ris_nx_sweep", "entries must be at least 1");
  for (auto b : bits_sweep)
    if (b < 1 || b > 16) fail("bits_sweep", "entries must lie in [1, 16]");
  for (auto t : traffic_sweep) unit("traffic_sweep", t);
  for (auto p : p_on_sweep_mw)
    if (!(p >= 0.0)) fail("p_on_sweep_mw", "entries must be non-negative");
  for (auto c : capacity_sweep_mah) {
    positive("capacity_sweep_mah", c);
    try {
      states_for_capacity(c, delta_mah);
    } catch (const BatteryError&) {
      fail("capacity_sweep_mah", "entries must be whole multiples of delta_mah");
    }
  }
  for (auto d : delta_grid_mah) positive("delta_grid_mah", d);
  if (!(target_ploc > 0.0 && target_ploc < 1.0)) fail("target_ploc", "must lie in (0, 1)");
  if (battery_ris_nx < 1) fail("battery_ris_nx", "must be at least 1");
  if (trace_periods < 1) fail("trace_periods", "must be at least 1");
}

double Scenario::tx_power_w() const { return dbm_to_w(tx_power_dbm); }
double Scenario::noise_w() const { return dbm_to_w(noise_dbm); }
Radio Scenario::radio() const { return Radio::at(carrier_hz); }

PathlossModel Scenario::pathloss_model() const { return {gamma0, d0, chi_los, chi_nlos}; }

BlockageField Scenario::blockage_field() const {
  return {blocker_density, blocker_height, blocker_diameter,
          blockage_mode == "sampled" ? BlockageMode::sampled : BlockageMode::analytic};
}

HarvesterModel Scenario::harvester() const {
  return HarvesterModel(harvester_a, harvester_b, harvester_c);
}

ConsumptionModel Scenario::consumption(int bits, double p_on) const {
  return {p_on * 1e-3, bits, controller_run_mw * 1e-3, controller_idle_mw * 1e-3};
}

FramePlan Scenario::frame_plan(double t) const { return {n_dl, n_ul, n_ce, period_s, t}; }

ArrayGeometry Scenario::bs_array() const {
  const Vec3 c(bs_position[0], bs_position[1], bs_position[2]);
  return ArrayGeometry::ula(c, bs_antennas, element_spacing_wavelengths * radio().wavelength);
}

ArrayGeometry Scenario::ris_array(std::size_t nx, std::size_t nz) const {
  const Vec3 c(ris_position[0], ris_position[1], ris_position[2]);
  return ArrayGeometry::planar(c, nx, nz, element_spacing_wavelengths * radio().wavelength);
}

Combining Scenario::combining_mode() const {
  return combining == "hard" ? Combining::hard : Combining::soft;
}

Scenario default_scenario() {
  Scenario s;
  // Harvester law f(x) = S x / (x + c) with S = a - b/c: saturation 50 mW,
  // knee at c = 50 mW input.
  s.harvester_a = 0.051;
  s.harvester_b = 0.00005;
  s.harvester_c = 0.05;
  s.periods_per_step = 25'920'000;  // three days of 10 ms periods
  s.soc_trace_step_periods = 360'000;  // one hour
  s.schemes = {"idle", "O-ARES", "O-wARES", "wARES-Q1", "wARES-Q2"};
  s.ue_sweep = {10, 25, 50, 75};
  s.ris_nx_sweep = {4, 8, 16};
  s.bits_sweep = {1, 2};
  s.traffic_sweep = {0.2, 0.5, 0.8};
  s.p_on_sweep_mw = {0.1, 0.12, 0.125, 0.13, 0.135};
  s.capacity_sweep_mah = {100, 200, 300, 400, 500, 600, 700, 800};
  s.delta_grid_mah = {10, 20};
  return s;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  Scenario s;
  std::set<std::string> seen;
  visit_fields(s, [&](const char* key, auto& field) {
    seen.insert(key);
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(std::string("missing required field '") + key + "'");
    try {
      it->get_to(field);
    } catch (const nlohmann::json::exception& e) {
      fail(key, e.what());
    }
  });
  for (const auto& item : j.items()) {
    if (!seen.count(item.key())) throw ConfigError("unknown field '" + item.key() + "'");
  }
  s.validate();
  return s;
}

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::ordered_json ordered;
  visit_fields(s, [&](const char* key, const auto& field) { ordered[key] = field; });
  return nlohmann::json::parse(ordered.dump());
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  nlohmann::ordered_json ordered;
  visit_fields(s, [&](const char* key, const auto& field) { ordered[key] = field; });
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write scenario file '" + path.string() + "'");
  out << ordered.dump(2) << '\n';
}

bool operator==(const Scenario& a, const Scenario& b) {
  return scenario_to_json(a) == scenario_to_json(b);
}

}  // namespace hris
