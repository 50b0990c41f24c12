#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "hris/energy.hpp"

using namespace hris;

namespace {

HrisConfig indexed(const std::vector<unsigned>& idx, int bits) {
  const double step = 2 * kPi / (1u << bits);
  CVector v(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t n = 0; n < idx.size(); ++n) v(static_cast<Eigen::Index>(n)) = std::polar(1.0, step * idx[n]);
  return {v, Branch::reflection, bits};
}

const HarvesterModel kHarvester(0.051, 0.00005, 0.05);

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("harvester hand values") {
  const HarvesterModel h(0.1, 0.01, 1.0);
  CHECK(harvest(h, 0.0) == 0.0);
  CHECK(harvest(h, 1.0) == doctest::Approx(0.045).epsilon(1e-14));
  CHECK(harvest(h, 1e6) == doctest::Approx(0.1 - 0.01).epsilon(1e-3));
  CHECK(h.saturation() == doctest::Approx(0.09));
}

TEST_CASE("harvester rejects invalid constants and inputs") {
  CHECK_THROWS_AS(HarvesterModel(0.1, 0.01, 0.0), EnergyError);
  CHECK_THROWS_AS(HarvesterModel(0.001, 0.01, 1.0), EnergyError);
  CHECK_THROWS_AS(harvest(kHarvester, -1e-3), EnergyError);
}

TEST_CASE("harvester is monotone and concave") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(0.0, 1.0), c(0.01, 1.0), x(0.0, 5.0);
  for (int t = 0; t < 1000; ++t) {
    const double cc = c(rng), aa = a(rng) + 0.01;
    const HarvesterModel h(aa, std::uniform_real_distribution<double>(0.0, aa * cc)(rng), cc);
    const double x1 = x(rng), x2 = x(rng);
    const double lo = std::min(x1, x2), hi = std::max(x1, x2);
    CHECK(harvest(h, lo) <= harvest(h, hi) + 1e-15);
    CHECK(harvest(h, 0.5 * (x1 + x2)) >= 0.5 * (harvest(h, x1) + harvest(h, x2)) - 1e-15);
  }
}

TEST_CASE("diode count matches popcount for every index up to eight bits") {
  for (int q = 1; q <= 8; ++q) {
    ConsumptionModel m;
    m.bits = q;
    m.p_on = 0.1e-3;
    for (unsigned idx = 0; idx < (1u << q); ++idx)
      CHECK(atom_consumption(idx, m) == doctest::Approx(0.1e-3 * std::popcount(idx)).epsilon(1e-15));
    CHECK_THROWS_AS(atom_consumption(1u << q, m), EnergyError);
  }
  ConsumptionModel m;
  CHECK(atom_consumption(0, m) == 0.0);
  CHECK(atom_consumption(3, m) == doctest::Approx(2 * m.p_on));
  CHECK(atom_consumption(2, m) == doctest::Approx(m.p_on));
}

TEST_CASE("configuration consumption") {
  ConsumptionModel m;
  CHECK(config_consumption(indexed(std::vector<unsigned>(32, 0), 2), m) == 0.0);
  CHECK(config_consumption(indexed(std::vector<unsigned>(32, 3), 2), m) == doctest::Approx(6.4e-3).epsilon(1e-14));

  std::mt19937_64 rng(2);
  for (int q = 1; q <= 4; ++q) {
    m.bits = q;
    std::uniform_int_distribution<unsigned> pick(0, (1u << q) - 1);
    std::vector<unsigned> idx(64);
    int diodes = 0;
    for (auto& i : idx) {
      i = pick(rng);
      diodes += std::popcount(i);
    }
    CHECK(config_consumption(indexed(idx, q), m) == doctest::Approx(diodes * m.p_on).epsilon(1e-12));
  }
  m.bits = 2;
  CHECK_THROWS_AS(config_consumption(indexed(std::vector<unsigned>(4, 1), 1), m), EnergyError);
  CHECK_THROWS_AS(config_consumption(HrisConfig::idle(4, Branch::reflection), m), EnergyError);
}

TEST_CASE("idle frame draws only the idle controller power") {
  FramePlan plan;
  ConsumptionModel m;
  const HrisConfig cfg = indexed(std::vector<unsigned>(32, 3), 2);
  const FrameConfigs configs{&cfg, &cfg, &cfg};
  const FrameEnergy idle = frame_energy(plan, kHarvester, m, 0.05, 0.01, configs, true, 0.1);
  CHECK(idle.consumed == doctest::Approx(10e-3 * 1.8e-3).epsilon(1e-14));
  const FrameEnergy active = frame_energy(plan, kHarvester, m, 0.05, 0.01, configs, false, 0.1);
  CHECK(idle.consumed < active.consumed);
  CHECK(idle.harvested == doctest::Approx(0.1 * active.harvested).epsilon(1e-14));
}

TEST_CASE("frame energy hand value") {
  FramePlan plan;  // 1 + 8 + 3 slots of 10 ms / 12
  plan.traffic = 0.5;
  ConsumptionModel m;
  const HrisConfig refl = indexed(std::vector<unsigned>(32, 1), 2);  // 32 diodes
  const HrisConfig abs_bs = indexed(std::vector<unsigned>(32, 3), 2);  // 64 diodes
  const HrisConfig abs_ue = indexed(std::vector<unsigned>(32, 0), 2);  // none
  const FrameEnergy e = frame_energy(plan, kHarvester, m, 0.02, 0.004, {&refl, &abs_bs, &abs_ue}, false, 1.0);
  auto law = [](double x) { return (0.051 * x + 0.00005) / (x + 0.05) - 0.00005 / 0.05; };
  const double slot = 10e-3 / 12;
  CHECK(e.harvested == doctest::Approx(0.5 * slot * (8 * law(0.02) + 3 * law(0.004))).epsilon(1e-12));
  const double power = 4.9e-3 + 32 * 0.1e-3 + (8 * 64 * 0.1e-3 + 3 * 0.0) / 11;
  CHECK(e.consumed == doctest::Approx(10e-3 * power).epsilon(1e-12));
}

TEST_CASE("no traffic, no harvest; linear in period and traffic") {
  FramePlan plan;
  ConsumptionModel m;
  const HrisConfig cfg = indexed(std::vector<unsigned>(16, 2), 2);
  const FrameConfigs configs{&cfg, &cfg, &cfg};
  plan.traffic = 0.0;
  CHECK(frame_energy(plan, kHarvester, m, 0.05, 0.01, configs, false, 1.0).harvested == 0.0);

  plan.traffic = 0.3;
  const FrameEnergy base = frame_energy(plan, kHarvester, m, 0.05, 0.01, configs, false, 1.0);
  plan.traffic = 0.6;
  CHECK(frame_energy(plan, kHarvester, m, 0.05, 0.01, configs, false, 1.0).harvested ==
        doctest::Approx(2 * base.harvested).epsilon(1e-14));
  plan.traffic = 0.3;
  plan.period = 30e-3;
  const FrameEnergy longer = frame_energy(plan, kHarvester, m, 0.05, 0.01, configs, false, 1.0);
  CHECK(longer.harvested == doctest::Approx(3 * base.harvested).epsilon(1e-14));
  CHECK(longer.consumed == doctest::Approx(3 * base.consumed).epsilon(1e-14));
}

TEST_CASE("invalid frame inputs") {
  FramePlan plan;
  ConsumptionModel m;
  const FrameConfigs none{};
  plan.traffic = 1.5;
  CHECK_THROWS_AS(frame_energy(plan, kHarvester, m, 0.0, 0.0, none, false, 1.0), EnergyError);
  plan = FramePlan{};
  CHECK_THROWS_AS(frame_energy(plan, kHarvester, m, 0.0, 0.0, none, false, 0.0), EnergyError);
}

TEST_CASE("idle fraction of the 8 x 4 half-wavelength surface") {
  CHECK(std::abs(idle_fraction(8, 4, 0.5) - 0.125 / (kPi * kPi)) < 1e-12);
  CHECK(idle_fraction(8, 4, 0.5) == doctest::Approx(0.01267).epsilon(1e-3));
  CHECK_THROWS_AS(idle_fraction(0, 4, 0.5), EnergyError);
}

}
