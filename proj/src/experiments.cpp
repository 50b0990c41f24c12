#include "hris/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace hris {

namespace {

enum Stream : std::uint64_t {
  kSumrateDrops = 1,
  kEnergyDrops = 2,
  kBatteryDrops = 3,
  kBatteryTraces = 4,
  kSocTraces = 5,
};

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::size_t scaled_grid(std::size_t base, std::size_t n, std::size_t n_ref) {
  const double v = std::round(static_cast<double>(base) * static_cast<double>(n) /
                              static_cast<double>(n_ref));
  return std::max<std::size_t>(1, static_cast<std::size_t>(v));
}

Codebook codebook_for(const Scenario& sc, const ArrayGeometry& ris, int bits) {
  const std::size_t n_az = scaled_grid(sc.codebook_az, ris.nx, sc.ris_nx);
  const std::size_t n_el = scaled_grid(sc.codebook_el, ris.nz, sc.ris_nz);
  return build_codebook(ris, sc.radio(), n_az, n_el, bits);
}

std::string str(std::size_t v) { return std::to_string(v); }
std::string str(std::uint64_t v, int) { return std::to_string(v); }

}  // namespace

Rng stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

ChannelSet realize_drop(const Scenario& sc, const ArrayGeometry& ris, std::size_t n_ues,
                        std::uint64_t drop) {
  Rng rng = stream_rng(sc.seed, kSumrateDrops, drop);
  Deployment dep;
  dep.radio = sc.radio();
  dep.bs = sc.bs_array();
  dep.ris = ris;
  dep.pathloss = sc.pathloss_model();
  dep.blockage = sc.blockage_field();
  dep.blockage_enabled = sc.blockage_enabled;
  dep.bs_ris_blockable = sc.bs_ris_blockable;
  // The HRIS sits at the midpoint of the y-min edge of the service area.
  std::uniform_real_distribution<double> ux(sc.ris_position[0] - 0.5 * sc.area_m[0],
                                            sc.ris_position[0] + 0.5 * sc.area_m[0]);
  std::uniform_real_distribution<double> uy(sc.ris_position[1], sc.ris_position[1] + sc.area_m[1]);
  dep.ues.reserve(n_ues);
  for (std::size_t k = 0; k < n_ues; ++k) {
    const double x = ux(rng);
    const double y = uy(rng);
    dep.ues.emplace_back(x, y, sc.ue_height);
  }
  return realize_channels(dep, rng);
}

CVector bs_incident(const Scenario& sc, const ChannelSet& ch) {
  const double m = static_cast<double>(ch.n_bs());
  const CVector w_r = std::sqrt(sc.tx_power_w() / m) * ch.a_bs_ris;
  return ch.G * w_r;
}

CVector ue_incident(const Scenario& sc, const ChannelSet& ch) {
  return std::sqrt(sc.tx_power_w()) * aggregate_ue_channel(ch, OracleMode::wares);
}

AresOutcome run_ares(const Scenario& sc, const ChannelSet& ch, const Codebook& codebook) {
  AresOutcome out;
  const double noise = sc.noise_w();
  const CVector v_b = bs_incident(sc, ch);
  const CVector v_u = ue_incident(sc, ch);
  out.bs_probe = probe_relative(codebook, v_b, sc.eta, noise, sc.threshold_factor, sc.combining_mode());
  out.ue_probe = probe_relative(codebook, v_u, sc.eta, noise, sc.threshold_factor, sc.combining_mode());
  out.reflection = compose_reflection(out.bs_probe.config, out.ue_probe.config, codebook.bits);
  if (!out.bs_probe.source_detected || !out.ue_probe.source_detected) {
    out.reflection = quantize(HrisConfig::idle(ch.n_ris(), Branch::reflection), codebook.bits);
  }
  out.p_abs_bs = sensed_power(out.bs_probe.config, v_b, sc.eta, noise);
  out.p_abs_ue = sensed_power(out.ue_probe.config, v_u, sc.eta, noise);
  return out;
}

HrisConfig scheme_reflection(const Scenario& sc, const ChannelSet& ch, const std::string& scheme,
                             const std::map<int, Codebook>& codebooks) {
  if (scheme == "idle") return HrisConfig::idle(ch.n_ris(), Branch::reflection);
  if (scheme == "O-ARES") return oracle_config(ch, OracleMode::ares);
  if (scheme == "O-wARES") return oracle_config(ch, OracleMode::wares);
  if (scheme == "wARES-Q1" || scheme == "wARES-Q2") {
    const int bits = scheme == "wARES-Q1" ? 1 : 2;
    const auto it = codebooks.find(bits);
    if (it == codebooks.end()) throw std::invalid_argument("no codebook for " + scheme);
    return run_ares(sc, ch, it->second).reflection;
  }
  throw std::invalid_argument("unknown scheme '" + scheme + "'");
}

LinkBudget evaluate_scheme(const Scenario& sc, const ChannelSet& ch, const HrisConfig& theta) {
  const CMatrix H = effective_channels(ch, theta, sc.eta);
  const Precoder W = rzf_precoder(H, sc.tx_power_w(), sc.noise_w());
  return evaluate(ch, theta, W, sc.eta, sc.noise_w());
}

// ---- reporting ----

const CsvTable& RunReport::table(const std::string& name) const {
  for (const auto& [n, t] : tables)
    if (n == name) return t;
  throw std::out_of_range("no table named '" + name + "'");
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

void emit_csv(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, table] : report.tables) emit_csv(table, dir / (name + ".csv"));
}

MeanCi mean_ci(const std::vector<double>& xs) {
  MeanCi out;
  out.n = xs.size();
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.ci95 = 1.96 * std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

// ---- sum-rate ----

MeanCi SumrateResult::summary(const std::string& scheme, std::size_t k) const {
  const auto s = std::find(schemes.begin(), schemes.end(), scheme);
  const auto kk = std::find(ue_counts.begin(), ue_counts.end(), k);
  if (s == schemes.end() || kk == ue_counts.end())
    throw std::out_of_range("no sum-rate result for " + scheme + " at K=" + std::to_string(k));
  return mean_ci(rate[static_cast<std::size_t>(s - schemes.begin())]
                     [static_cast<std::size_t>(kk - ue_counts.begin())]);
}

RunReport SumrateResult::report(const Scenario& sc) const {
  RunReport rep;
  CsvTable drops{{"scheme", "K", "seed", "drop", "sum_rate_bps_hz"}, {}};
  CsvTable summary{{"scheme", "K", "seed", "n_drops", "mean_sum_rate_bps_hz", "ci95_bps_hz"}, {}};
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    for (std::size_t k = 0; k < ue_counts.size(); ++k) {
      const auto& xs = rate[s][k];
      for (std::size_t d = 0; d < xs.size(); ++d) {
        drops.rows.push_back({schemes[s], str(ue_counts[k]), str(sc.seed, 0), str(d), format_number(xs[d])});
      }
      const MeanCi m = mean_ci(xs);
      summary.rows.push_back({schemes[s], str(ue_counts[k]), str(sc.seed, 0), str(m.n),
                              format_number(m.mean), format_number(m.ci95)});
    }
  }
  CsvTable frac{{"scheme", "K", "seed", "drop", "ue", "direct_power_fraction"}, {}};
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    const auto& xs = direct_fraction[s];
    for (std::size_t i = 0; i < xs.size(); ++i) {
      frac.rows.push_back({schemes[s], str(sc.n_ues), str(sc.seed, 0), str(i / sc.n_ues),
                           str(i % sc.n_ues), format_number(xs[i])});
    }
  }
  rep.tables.emplace_back("sumrate_drops", std::move(drops));
  rep.tables.emplace_back("sumrate_summary", std::move(summary));
  rep.tables.emplace_back("direct_fraction", std::move(frac));
  return rep;
}

SumrateResult run_sumrate_experiment(const Scenario& sc, const RunOptions& opts) {
  sc.validate();
  if (sc.schemes.empty()) throw std::invalid_argument("no schemes to run");
  if (sc.ue_sweep.empty()) throw std::invalid_argument("empty UE sweep");
  const ArrayGeometry ris = sc.ris_array(sc.ris_nx, sc.ris_nz);
  std::map<int, Codebook> codebooks;
  for (int bits : {1, 2}) codebooks.emplace(bits, codebook_for(sc, ris, bits));

  SumrateResult res;
  res.schemes = sc.schemes;
  res.ue_counts = sc.ue_sweep;
  const std::size_t n_s = res.schemes.size();
  const std::size_t n_k = res.ue_counts.size();
  const std::size_t k_max = std::max(*std::max_element(res.ue_counts.begin(), res.ue_counts.end()), sc.n_ues);
  res.rate.assign(n_s, std::vector<std::vector<double>>(n_k, std::vector<double>(sc.n_drops)));
  std::vector<std::vector<std::vector<double>>> frac(n_s, std::vector<std::vector<double>>(sc.n_drops));

  parallel_for(sc.n_drops, opts.threads, [&](std::size_t d) {
    const ChannelSet full = realize_drop(sc, ris, k_max, d);
    auto subset = [&](std::size_t k) {
      ChannelSet ch = full;
      ch.h.resize(k);
      ch.h_d.resize(k);
      ch.ris_ue_los.resize(k);
      ch.bs_ue_los.resize(k);
      return ch;
    };
    for (std::size_t ki = 0; ki < n_k; ++ki) {
      const ChannelSet ch = subset(res.ue_counts[ki]);
      for (std::size_t s = 0; s < n_s; ++s) {
        const HrisConfig theta = scheme_reflection(sc, ch, res.schemes[s], codebooks);
        res.rate[s][ki][d] = evaluate_scheme(sc, ch, theta).sum_rate;
      }
    }
    const ChannelSet ch = subset(sc.n_ues);
    for (std::size_t s = 0; s < n_s; ++s) {
      const HrisConfig theta = scheme_reflection(sc, ch, res.schemes[s], codebooks);
      frac[s][d] = evaluate_scheme(sc, ch, theta).direct_power_fraction;
    }
  });

  res.direct_fraction.resize(n_s);
  for (std::size_t s = 0; s < n_s; ++s)
    for (const auto& v : frac[s]) res.direct_fraction[s].insert(res.direct_fraction[s].end(), v.begin(), v.end());
  return res;
}

// ---- harvested and consumed power ----

const EnergyPoint& EnergyResult::at(std::size_t nx, int bits, double traffic, double p_on) const {
  for (const auto& p : points)
    if (p.nx == nx && p.bits == bits && p.traffic == traffic && p.p_on_mw == p_on) return p;
  throw std::out_of_range("no energy point for the requested parameters");
}

RunReport EnergyResult::report(const Scenario& sc) const {
  RunReport rep;
  CsvTable drops{{"N", "nx", "nz", "bits", "traffic", "p_on_mw", "seed", "drop", "harvested_mw",
                  "consumed_mw"},
                 {}};
  CsvTable summary{{"N", "nx", "nz", "bits", "traffic", "p_on_mw", "seed", "n_drops",
                    "mean_harvested_mw", "ci95_harvested_mw", "mean_consumed_mw",
                    "ci95_consumed_mw"},
                   {}};
  for (const auto& p : points) {
    const std::vector<std::string> key{str(p.nx * p.nz), str(p.nx), str(p.nz), std::to_string(p.bits),
                                       format_number(p.traffic), format_number(p.p_on_mw),
                                       str(sc.seed, 0)};
    for (std::size_t d = 0; d < p.harvested_w.size(); ++d) {
      auto row = key;
      row.push_back(str(d));
      row.push_back(format_number(p.harvested_w[d] * 1e3));
      row.push_back(format_number(p.consumed_w[d] * 1e3));
      drops.rows.push_back(std::move(row));
    }
    const MeanCi h = mean_ci(p.harvested_w);
    const MeanCi c = mean_ci(p.consumed_w);
    auto row = key;
    row.push_back(str(h.n));
    for (double v : {h.mean, h.ci95, c.mean, c.ci95}) row.push_back(format_number(v * 1e3));
    summary.rows.push_back(std::move(row));
  }
  rep.tables.emplace_back("energy_drops", std::move(drops));
  rep.tables.emplace_back("energy_summary", std::move(summary));
  return rep;
}

namespace {

FrameEnergy active_frame(const Scenario& sc, const AresOutcome& a, int bits, double traffic,
                         double p_on) {
  const HrisConfig& phi_b = a.bs_probe.config;
  const HrisConfig& phi_u = a.ue_probe.config;
  // Undetected sources leave the idle configuration, which holds phase index 0.
  const HrisConfig qb = phi_b.bits ? phi_b : quantize(phi_b, bits);
  const HrisConfig qu = phi_u.bits ? phi_u : quantize(phi_u, bits);
  const FrameConfigs cfg{&a.reflection, &qb, &qu};
  return frame_energy(sc.frame_plan(traffic), sc.harvester(), sc.consumption(bits, p_on),
                      a.p_abs_bs, a.p_abs_ue, cfg, false, 1.0);
}

FrameEnergy idle_frame(const Scenario& sc, const AresOutcome& a, int bits, double traffic,
                       double p_on, double nu) {
  return frame_energy(sc.frame_plan(traffic), sc.harvester(), sc.consumption(bits, p_on),
                      a.p_abs_bs, a.p_abs_ue, FrameConfigs{}, true, nu);
}

std::vector<AresOutcome> probe_drops(const Scenario& sc, const ArrayGeometry& ris, int bits,
                                     const RunOptions& opts) {
  const Codebook cb = codebook_for(sc, ris, bits);
  std::vector<AresOutcome> out(sc.n_drops);
  parallel_for(sc.n_drops, opts.threads, [&](std::size_t d) {
    out[d] = run_ares(sc, realize_drop(sc, ris, sc.n_ues, d), cb);
  });
  return out;
}

}  // namespace

EnergyResult run_energy_experiment(const Scenario& sc, const RunOptions& opts) {
  sc.validate();
  EnergyResult res;
  const std::vector<double> traffic = sc.traffic_sweep.empty() ? std::vector<double>{sc.traffic} : sc.traffic_sweep;
  const std::vector<double> p_on = sc.p_on_sweep_mw.empty() ? std::vector<double>{sc.p_on_mw} : sc.p_on_sweep_mw;
  const std::vector<std::size_t> nxs = sc.ris_nx_sweep.empty() ? std::vector<std::size_t>{sc.ris_nx} : sc.ris_nx_sweep;
  const std::vector<int> bits_list = sc.bits_sweep.empty() ? std::vector<int>{sc.quantization_bits} : sc.bits_sweep;

  for (std::size_t nx : nxs) {
    const ArrayGeometry ris = sc.ris_array(nx, sc.ris_nz);
    for (int bits : bits_list) {
      const std::vector<AresOutcome> drops = probe_drops(sc, ris, bits, opts);
      for (double t : traffic) {
        for (double p : p_on) {
          EnergyPoint pt{nx, sc.ris_nz, bits, t, p, {}, {}};
          for (const auto& a : drops) {
            const FrameEnergy e = active_frame(sc, a, bits, t, p);
            pt.harvested_w.push_back(e.harvested / sc.period_s);
            pt.consumed_w.push_back(e.consumed / sc.period_s);
          }
          res.points.push_back(std::move(pt));
        }
      }
    }
  }
  return res;
}

// ---- battery ----

RunReport BatteryResult::report(const Scenario& sc) const {
  RunReport rep;
  CsvTable ploc_t{{"p_on_mw", "capacity_mah", "delta_mah", "n_states", "guard_state", "seed",
                   "mu_delta_j", "sigma_delta_j", "ploc_theory", "ploc_empirical",
                   "ploc_standard_error", "trace_periods"},
                  {}};
  for (const auto& p : ploc) {
    const auto guard = static_cast<std::size_t>(std::floor(sc.guard * static_cast<double>(p.n_states - 1)));
    ploc_t.rows.push_back({format_number(p.p_on_mw), format_number(p.capacity_mah),
                           format_number(sc.delta_mah), str(p.n_states), str(guard), str(sc.seed, 0),
                           format_number(p.dist.mean), format_number(p.dist.std),
                           format_number(p.ploc_theory), format_number(p.ploc_empirical),
                           format_number(p.standard_error), str(sc.trace_periods)});
  }
  CsvTable size_t_{{"p_on_mw", "seed", "target_ploc", "mu_delta_j", "sigma_delta_j", "feasible",
                    "n_states", "delta_mah", "capacity_mah", "ploc"},
                   {}};
  for (const auto& s : sizing) {
    std::vector<std::string> row{format_number(s.p_on_mw), str(sc.seed, 0), format_number(sc.target_ploc),
                                 format_number(s.dist.mean), format_number(s.dist.std)};
    if (s.sizing) {
      row.insert(row.end(), {"1", str(s.sizing->n_states),
                             format_number(joules_to_mah(s.sizing->delta, sc.battery_voltage)),
                             format_number(joules_to_mah(s.sizing->capacity, sc.battery_voltage)),
                             format_number(s.sizing->ploc)});
    } else {
      row.insert(row.end(), {"0", "", "", "", ""});
    }
    size_t_.rows.push_back(std::move(row));
  }
  CsvTable soc{{"traffic", "capacity_mah", "seed", "step", "soc_mah"}, {}};
  for (const auto& tr : traces) {
    for (std::size_t i = 0; i < tr.soc_mah.size(); ++i) {
      soc.rows.push_back({format_number(tr.traffic), format_number(tr.capacity_mah), str(sc.seed, 0),
                          str(i), format_number(tr.soc_mah[i])});
    }
  }
  rep.tables.emplace_back("battery_ploc", std::move(ploc_t));
  rep.tables.emplace_back("battery_sizing", std::move(size_t_));
  rep.tables.emplace_back("soc_traces", std::move(soc));
  return rep;
}

BatteryResult run_battery_experiment(const Scenario& sc, const RunOptions& opts) {
  sc.validate();
  BatteryResult res;
  const int bits = sc.quantization_bits;
  const ArrayGeometry ris = sc.ris_array(sc.battery_ris_nx, sc.ris_nz);
  const double nu = idle_fraction(sc.battery_ris_nx, sc.ris_nz, sc.element_spacing_wavelengths);
  const std::vector<AresOutcome> drops = probe_drops(sc, ris, bits, opts);
  const double steps = sc.periods_per_step;
  const double delta = mah_to_joules(sc.delta_mah, sc.battery_voltage);
  const std::vector<double> p_on = sc.p_on_sweep_mw.empty() ? std::vector<double>{sc.p_on_mw} : sc.p_on_sweep_mw;

  auto step_samples = [&](double p, double t) {
    std::vector<double> xs;
    xs.reserve(drops.size());
    for (const auto& a : drops) xs.push_back(steps * active_frame(sc, a, bits, t, p).net());
    return xs;
  };

  for (std::size_t pi = 0; pi < p_on.size(); ++pi) {
    const std::vector<double> xs = step_samples(p_on[pi], sc.traffic);
    const NetEnergyDist dist = NetEnergyDist::fit(xs);
    res.mean_period_net[{p_on[pi], sc.traffic}] = dist.mean / steps;
    std::vector<double> grid;
    for (double d : sc.delta_grid_mah) grid.push_back(mah_to_joules(d, sc.battery_voltage));
    if (grid.empty()) grid.push_back(delta);
    res.sizing.push_back({p_on[pi], dist, size_battery(dist, grid, sc.target_ploc, sc.guard)});
    for (std::size_t ci = 0; ci < sc.capacity_sweep_mah.size(); ++ci) {
      PlocPoint pt;
      pt.p_on_mw = p_on[pi];
      pt.capacity_mah = sc.capacity_sweep_mah[ci];
      pt.n_states = states_for_capacity(pt.capacity_mah, sc.delta_mah);
      pt.dist = dist;
      res.ploc.push_back(pt);
    }
  }

  parallel_for(res.ploc.size(), opts.threads, [&](std::size_t j) {
    PlocPoint& pt = res.ploc[j];
    BatteryChain chain = build_chain(pt.dist, pt.n_states, delta, sc.guard);
    try {
      chain.pi = stationary(chain);
    } catch (const ReducibleChainError&) {
      chain.pi = stationary_power_iteration(chain);
    }
    pt.ploc_theory = loss_of_charge(chain);
    Rng rng = stream_rng(sc.seed, kBatteryTraces, j);
    TraceOptions topt;
    topt.n_periods = sc.trace_periods;
    topt.record_every = sc.trace_periods;
    const TraceResult tr = simulate_trace(pt.dist, pt.n_states, delta, sc.guard, pt.n_states - 1, topt, rng);
    pt.ploc_empirical = tr.empirical_ploc;
    pt.standard_error = tr.standard_error;
  });

  const std::vector<double> traffic = sc.traffic_sweep.empty() ? std::vector<double>{sc.traffic} : sc.traffic_sweep;
  const double capacity = mah_to_joules(sc.capacity_mah, sc.battery_voltage);
  const double trace_steps = sc.soc_trace_step_periods;
  res.traces.resize(traffic.size());
  parallel_for(traffic.size(), opts.threads, [&](std::size_t ti) {
    const double t = traffic[ti];
    std::vector<PeriodEnergy> pool;
    pool.reserve(drops.size());
    for (const auto& a : drops) {
      pool.push_back({trace_steps * active_frame(sc, a, bits, t, sc.p_on_mw).net(),
                      trace_steps * idle_frame(sc, a, bits, t, sc.p_on_mw, nu).net()});
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const EnergySource source = [&](std::size_t, Rng& rng) { return pool[pick(rng)]; };
    Rng rng = stream_rng(sc.seed, kSocTraces, ti);
    TraceOptions topt;
    topt.n_periods = std::max<std::size_t>(1, sc.soc_trace_steps);
    const TraceResult tr = simulate_trace(source, capacity, delta, sc.guard, 0.5 * capacity, topt, rng);
    SocTrace out;
    out.traffic = t;
    out.capacity_mah = sc.capacity_mah;
    out.idle_fraction = tr.empirical_ploc;
    for (double e : tr.soc) out.soc_mah.push_back(joules_to_mah(e, sc.battery_voltage));
    res.traces[ti] = std::move(out);
  });
  for (double t : traffic) {
    for (double p : p_on) {
      if (res.mean_period_net.count({p, t})) continue;
      const std::vector<double> xs = step_samples(p, t);
      res.mean_period_net[{p, t}] = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size() / steps;
    }
  }
  return res;
}

}  // namespace hris
