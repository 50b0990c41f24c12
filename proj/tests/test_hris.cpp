#include <doctest.h>

#include <cmath>
#include <random>

#include "hris/hris.hpp"

using namespace hris;

namespace {

const Radio kRadio = Radio::at(28e9);

ArrayGeometry table_ris() { return ArrayGeometry::planar({0, 0, 6}, 8, 4, kRadio.wavelength / 2); }

ChannelSet drop(std::size_t k, Rng& rng) {
  Deployment dep;
  dep.radio = kRadio;
  dep.bs = ArrayGeometry::ula({-25, 25, 6}, 4, kRadio.wavelength / 2);
  dep.ris = table_ris();
  std::uniform_real_distribution<double> x(-25.0, 25.0), y(0.5, 50.0);
  for (std::size_t i = 0; i < k; ++i) dep.ues.emplace_back(x(rng), y(rng), 1.5);
  return realize_channels(dep, rng);
}

CVector random_unit_modulus(Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(1.0, ph(rng));
  return v;
}

HrisConfig single_phase(double angle) {
  return HrisConfig{CVector::Constant(1, std::polar(1.0, angle)), Branch::reflection, std::nullopt};
}

double angular_error(cdouble a, cdouble b) { return std::abs(std::arg(a / b)); }

}  // namespace

TEST_SUITE("hris") {

TEST_CASE("phase quantization examples") {
  for (int q = 1; q <= 8; ++q) CHECK(phase_index(std::polar(1.0, 0.0), q) == 0u);
  CHECK(phase_index(std::polar(1.0, 0.9 * kPi / 2), 2) == 1u);
  const HrisConfig snapped = quantize(single_phase(0.9 * kPi / 2), 2);
  CHECK(std::abs(snapped.phases(0) - cdouble(0, 1)) < 1e-12);
  CHECK(snapped.bits == 2);
}

TEST_CASE("ties go to the smaller angle and the grid wraps") {
  CHECK(phase_index(std::polar(1.0, kPi / 4), 2) == 0u);
  CHECK(phase_index(std::polar(1.0, 3 * kPi / 4), 2) == 1u);
  CHECK(phase_index(std::polar(1.0, 2 * kPi - 0.1), 2) == 0u);
  CHECK(phase_index(std::polar(1.0, -kPi / 2), 2) == 3u);
  CHECK_THROWS_AS(phase_index(1.0, 0), HrisError);
}

TEST_CASE("16-bit quantization error is bounded by half a step") {
  Rng rng(4);
  const HrisConfig raw{random_unit_modulus(4096, rng), Branch::reflection, std::nullopt};
  const HrisConfig q = quantize(raw, 16);
  double worst = 0.0;
  for (Eigen::Index n = 0; n < raw.phases.size(); ++n) {
    worst = std::max(worst, angular_error(q.phases(n), raw.phases(n)));
    CHECK(std::abs(q.phases(n)) == doctest::Approx(1.0));
  }
  CHECK(worst <= kPi / 65536 + 1e-12);
}

TEST_CASE("quantized phases lie on the grid") {
  Rng rng(5);
  const HrisConfig raw{random_unit_modulus(200, rng), Branch::reflection, std::nullopt};
  for (int q = 1; q <= 4; ++q) {
    const HrisConfig c = quantize(raw, q);
    const auto idx = phase_indices(c);
    const double step = 2 * kPi / (1 << q);
    for (std::size_t n = 0; n < idx.size(); ++n)
      CHECK(std::abs(c.phases(static_cast<Eigen::Index>(n)) - std::polar(1.0, step * idx[n])) < 1e-12);
  }
  CHECK_THROWS_AS(phase_indices(raw), HrisError);
}

TEST_CASE("unit-modulus projection") {
  CVector v(3);
  v << cdouble(3, 4), cdouble(0, 0), cdouble(0, -2);
  const CVector u = unit_modulus(v);
  CHECK(std::abs(u(0) - cdouble(0.6, 0.8)) < 1e-15);
  CHECK(u(1) == cdouble(1, 0));
  CHECK(std::abs(u(2) - cdouble(0, -1)) < 1e-15);
}

TEST_CASE("default codebook has 32 quantized unit-modulus codewords") {
  const Codebook cb = build_codebook(table_ris(), kRadio, 8, 4, 2);
  REQUIRE(cb.size() == 32);
  CHECK(cb.directions.size() == 32);
  for (const auto& c : cb.codewords) {
    CHECK(c.size() == 32);
    CHECK(c.bits == 2);
    CHECK(c.branch == Branch::absorption);
    for (Eigen::Index n = 0; n < c.phases.size(); ++n) CHECK(std::abs(c.phases(n)) == doctest::Approx(1.0));
    CHECK_NOTHROW(phase_indices(c));
  }
}

TEST_CASE("broadside codeword is all ones") {
  for (int q = 1; q <= 4; ++q) {
    const HrisConfig c = steering_codeword(table_ris(), kRadio, {0.0, 0.0}, q);
    for (Eigen::Index n = 0; n < c.phases.size(); ++n) CHECK(std::abs(c.phases(n) - cdouble(1, 0)) < 1e-12);
  }
}

TEST_CASE("each codeword is the best match for its own direction") {
  const auto ris = table_ris();
  for (int q : {1, 2, 3}) {
    const Codebook cb = build_codebook(ris, kRadio, 8, 4, q);
    for (std::size_t i = 0; i < cb.size(); ++i) {
      const auto& d = cb.directions[i];
      const CVector a = array_response_direction(ris, direction_from_angles(d.azimuth, d.elevation), kRadio);
      const double own = std::abs(cb.codewords[i].phases.dot(a));
      for (std::size_t j = 0; j < cb.size(); ++j) {
        if (j == i) continue;
        CHECK(std::abs(cb.codewords[j].phases.dot(a)) <= own + 1e-9);
      }
    }
  }
}

TEST_CASE("sensed power examples") {
  Rng rng(6);
  CVector v(32);
  std::normal_distribution<double> g;
  for (Eigen::Index n = 0; n < v.size(); ++n) v(n) = cdouble(g(rng), g(rng));
  const HrisConfig matched{unit_modulus(v), Branch::absorption, std::nullopt};
  const double s = v.cwiseAbs().sum();
  CHECK(sensed_power(matched, v, 0.8, 1e-11) == doctest::Approx(0.2 * s * s + 1e-11).epsilon(1e-12));
  CHECK(sensed_power(matched, CVector::Zero(32), 0.8, 1e-11) == doctest::Approx(1e-11));
  CHECK(sensed_power(matched, v, 1.0, 1e-11) == doctest::Approx(1e-11));

  const HrisConfig any{random_unit_modulus(32, rng), Branch::absorption, std::nullopt};
  const HrisConfig rotated{any.phases * std::polar(1.0, 1.234), Branch::absorption, std::nullopt};
  CHECK(sensed_power(rotated, v, 0.3, 0.0) == doctest::Approx(sensed_power(any, v, 0.3, 0.0)).epsilon(1e-12));
}

TEST_CASE("probing a single on-grid source recovers its codeword") {
  const auto ris = table_ris();
  const Codebook cb = build_codebook(ris, kRadio, 8, 4, 2);
  for (std::size_t i = 0; i < cb.size(); ++i) {
    const auto& d = cb.directions[i];
    const CVector v = 1e-3 * array_response_direction(ris, direction_from_angles(d.azimuth, d.elevation), kRadio);
    const ProbeResult sweep = probe(cb, v, 0.8, 0.0, 0.0, Combining::hard);
    const auto best = std::max_element(sweep.profile.powers.begin(), sweep.profile.powers.end());
    CHECK(static_cast<std::size_t>(best - sweep.profile.powers.begin()) == i);

    const ProbeResult r = probe(cb, v, 0.8, 0.0, 0.9 * *best, Combining::soft);
    REQUIRE(r.source_detected);
    CHECK(r.profile.peak_indices == std::vector<std::size_t>{i});
    CHECK((r.config.phases - cb.codewords[i].phases).norm() < 1e-12);
  }
}

TEST_CASE("probing silence detects nothing") {
  const Codebook cb = build_codebook(table_ris(), kRadio, 8, 4, 2);
  const ProbeResult r = probe(cb, CVector::Zero(32), 0.8, 1e-11, 2e-11, Combining::soft);
  CHECK_FALSE(r.source_detected);
  CHECK(r.profile.peak_indices.empty());
  CHECK((r.config.phases - CVector::Ones(32)).norm() < 1e-15);
  CHECK_THROWS_AS(probe(cb, CVector::Zero(32), 0.8, 1e-11, 1e-12, Combining::soft), HrisError);
}

TEST_CASE("soft combining of two equal sources is the normalized equal-weight sum") {
  const auto ris = table_ris();
  const Codebook cb = build_codebook(ris, kRadio, 8, 4, 2);
  // Mirror-image azimuths in the same elevation row receive equal power.
  const std::size_t i = 8 + 1, j = 8 + 6;
  auto steer = [&](std::size_t idx) {
    const auto& d = cb.directions[idx];
    return array_response_direction(ris, direction_from_angles(d.azimuth, d.elevation), kRadio);
  };
  const CVector v = 1e-3 * (steer(i) + steer(j));
  const ProbeResult sweep = probe(cb, v, 0.8, 0.0, 0.0, Combining::soft);
  const double pi_ = sweep.profile.powers[i], pj = sweep.profile.powers[j];
  REQUIRE(pi_ == doctest::Approx(pj).epsilon(1e-9));

  const ProbeResult r = probe(cb, v, 0.8, 0.0, 0.5 * std::min(pi_, pj), Combining::soft);
  REQUIRE(r.profile.peak_indices == std::vector<std::size_t>{i, j});
  const HrisConfig expected = quantize(
      HrisConfig{unit_modulus(cb.codewords[i].phases + cb.codewords[j].phases), Branch::absorption, std::nullopt}, 2);
  CHECK((r.config.phases - expected.phases).norm() < 1e-12);
}

TEST_CASE("relative threshold is a multiple of the median") {
  CHECK(relative_threshold({1, 5, 3}, 2.0) == doctest::Approx(6.0));
  CHECK(relative_threshold({4, 1, 3, 2}, 2.0) == doctest::Approx(5.0));
}

TEST_CASE("composing reflection configurations") {
  Rng rng(9);
  const HrisConfig phi{random_unit_modulus(32, rng), Branch::absorption, std::nullopt};
  const HrisConfig self = compose_reflection(phi, phi, std::nullopt);
  CHECK((self.phases - CVector::Ones(32)).norm() < 1e-12);
  CHECK(self.branch == Branch::reflection);

  const HrisConfig ones = HrisConfig::idle(32, Branch::absorption);
  CHECK((compose_reflection(ones, phi, std::nullopt).phases - phi.phases.conjugate()).norm() < 1e-12);

  const HrisConfig q = compose_reflection(ones, phi, 2);
  CHECK(q.bits == 2);
  CHECK_NOTHROW(phase_indices(q));
}

TEST_CASE("unquantized composition reproduces the closed-form configuration") {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const ChannelSet ch = drop(8, rng);
    const CVector h_sum = aggregate_ue_channel(ch, OracleMode::wares);
    const HrisConfig phi_b{unit_modulus(ch.a_ris_bs), Branch::absorption, std::nullopt};
    const HrisConfig phi_u{unit_modulus(h_sum), Branch::absorption, std::nullopt};
    const HrisConfig theta = compose_reflection(phi_b, phi_u, std::nullopt);
    CVector direct(32);
    for (Eigen::Index n = 0; n < 32; ++n)
      direct(n) = std::polar(1.0, std::arg(std::conj(h_sum(n)) * ch.a_ris_bs(n)));
    CHECK((theta.phases - direct).norm() < 1e-10);
    CHECK((oracle_config(ch, OracleMode::wares).phases - direct).norm() < 1e-10);
  }
}

TEST_CASE("oracle modes coincide for one UE and for co-located UEs") {
  Rng rng(11);
  const ChannelSet one = drop(1, rng);
  CHECK((oracle_config(one, OracleMode::ares).phases - oracle_config(one, OracleMode::wares).phases).norm() < 1e-12);

  ChannelSet same = drop(1, rng);
  same.h.assign(5, same.h[0]);
  same.h_d.assign(5, same.h_d[0]);
  CHECK((oracle_config(same, OracleMode::ares).phases - oracle_config(same, OracleMode::wares).phases).norm() < 1e-12);
}

TEST_CASE("weighted oracle leans toward the stronger UE") {
  Deployment dep;
  dep.radio = kRadio;
  dep.bs = ArrayGeometry::ula({-25, 25, 6}, 4, kRadio.wavelength / 2);
  dep.ris = table_ris();
  dep.ues = {{3, 4, 1.5}, {-20, 45, 1.5}};
  dep.blockage_enabled = false;
  Rng rng(1);
  const ChannelSet ch = realize_channels(dep, rng);
  REQUIRE(ch.h[0].norm() > 2 * ch.h[1].norm());

  const CVector ares = oracle_config(ch, OracleMode::ares).phases;
  const CVector wares = oracle_config(ch, OracleMode::wares).phases;
  CHECK((ares - wares).norm() > 1e-3);
  const CVector strong = unit_modulus(equivalent_channel(ch.h[0], ch.a_ris_bs));
  CHECK(std::abs(wares.dot(strong)) > std::abs(ares.dot(strong)));
}

TEST_CASE("closed form beats random configurations") {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const ChannelSet ch = drop(10, rng);
    const CVector h_eq = equivalent_channel(aggregate_ue_channel(ch, OracleMode::wares), ch.a_ris_bs);
    const double best = reflected_gain(oracle_config(ch, OracleMode::wares).phases, h_eq);
    CHECK(best == doctest::Approx(std::pow(h_eq.cwiseAbs().sum(), 2)).epsilon(1e-12));
    double rival = 0.0;
    for (int r = 0; r < 10000; ++r) rival = std::max(rival, reflected_gain(random_unit_modulus(32, rng), h_eq));
    CHECK(rival <= best);
  }
}

TEST_CASE("two-bit quantization keeps more reflected gain than one bit on average") {
  Rng rng(13);
  double g1 = 0.0, g2 = 0.0;
  for (int d = 0; d < 100; ++d) {
    const ChannelSet ch = drop(10, rng);
    const CVector h_eq = equivalent_channel(aggregate_ue_channel(ch, OracleMode::wares), ch.a_ris_bs);
    const HrisConfig theta = oracle_config(ch, OracleMode::wares);
    g1 += reflected_gain(quantize(theta, 1).phases, h_eq);
    g2 += reflected_gain(quantize(theta, 2).phases, h_eq);
  }
  CHECK(g2 >= g1);
}

}
