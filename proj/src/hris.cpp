#include "hris/hris.hpp"

#include <algorithm>
#include <cmath>

namespace hris {

HrisConfig HrisConfig::idle(std::size_t n, Branch branch) {
  return HrisConfig{CVector::Ones(static_cast<Eigen::Index>(n)), branch, std::nullopt};
}

double wrapped_angle(cdouble z) {
  double a = std::arg(z);
  if (a < 0.0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a -= 2.0 * kPi;
  return a;
}

unsigned phase_index(cdouble z, int bits) {
  if (bits < 1 || bits > 30) throw HrisError("quantization bits must be in [1, 30]");
  const unsigned levels = 1u << bits;
  const double step = 2.0 * kPi / static_cast<double>(levels);
  const double k = wrapped_angle(z) / step;
  const auto m = static_cast<long long>(std::ceil(k - 0.5));
  return static_cast<unsigned>(m % static_cast<long long>(levels));
}

HrisConfig quantize(const HrisConfig& config, int bits) {
  const double step = 2.0 * kPi / static_cast<double>(1u << bits);
  HrisConfig out{CVector(config.phases.size()), config.branch, bits};
  for (Eigen::Index n = 0; n < config.phases.size(); ++n) {
    out.phases(n) = std::polar(1.0, step * phase_index(config.phases(n), bits));
  }
  return out;
}

std::vector<unsigned> phase_indices(const HrisConfig& config) {
  if (!config.bits) throw HrisError("configuration is not quantized");
  std::vector<unsigned> idx(config.size());
  for (std::size_t n = 0; n < idx.size(); ++n) {
    idx[n] = phase_index(config.phases(static_cast<Eigen::Index>(n)), *config.bits);
  }
  return idx;
}

CVector unit_modulus(const CVector& v) {
  CVector out(v.size());
  for (Eigen::Index n = 0; n < v.size(); ++n) {
    const double mag = std::abs(v(n));
    out(n) = mag > 0.0 ? v(n) / mag : cdouble(1.0, 0.0);
  }
  return out;
}

std::vector<Direction> codebook_directions(std::size_t n_az, std::size_t n_el) {
  if (n_az == 0 || n_el == 0) throw HrisError("codebook needs at least one direction");
  std::vector<Direction> dirs;
  dirs.reserve(n_az * n_el);
  for (std::size_t ie = 0; ie < n_el; ++ie) {
    const double el = -kPi / 4.0 + (static_cast<double>(ie) + 0.5) * (kPi / 2.0) / n_el;
    for (std::size_t ia = 0; ia < n_az; ++ia) {
      const double az = -kPi / 2.0 + (static_cast<double>(ia) + 0.5) * kPi / n_az;
      dirs.push_back({az, el});
    }
  }
  return dirs;
}

HrisConfig steering_codeword(const ArrayGeometry& geom, const Radio& radio,
                             const Direction& dir, int bits) {
  HrisConfig raw{array_response_direction(geom, direction_from_angles(dir.azimuth, dir.elevation),
                                          radio),
                 Branch::absorption, std::nullopt};
  return quantize(raw, bits);
}

Codebook build_codebook(const ArrayGeometry& geom, const Radio& radio, std::size_t n_az,
                        std::size_t n_el, int bits) {
  Codebook cb;
  cb.bits = bits;
  cb.directions = codebook_directions(n_az, n_el);
  cb.codewords.reserve(cb.directions.size());
  for (const auto& d : cb.directions) cb.codewords.push_back(steering_codeword(geom, radio, d, bits));
  return cb;
}

double sensed_power(const HrisConfig& config_abs, const CVector& incident, double eta,
                    double noise_var) {
  if (config_abs.phases.size() != incident.size())
    throw HrisError("sensed_power: configuration and incident signal differ in length");
  const cdouble y = config_abs.phases.dot(incident);  // phi^H v
  return (1.0 - eta) * std::norm(y) + noise_var;
}

double relative_threshold(const std::vector<double>& powers, double factor) {
  if (powers.empty()) throw HrisError("empty power profile");
  std::vector<double> sorted = powers;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return factor * median;
}

namespace {

PowerProfile sweep(const Codebook& codebook, const CVector& incident, double eta,
                   double noise_var) {
  PowerProfile profile;
  profile.powers.reserve(codebook.size());
  for (const auto& c : codebook.codewords) {
    profile.powers.push_back(sensed_power(c, incident, eta, noise_var));
  }
  return profile;
}

ProbeResult combine(const Codebook& codebook, PowerProfile profile, double tau,
                    Combining weighting) {
  profile.threshold = tau;
  for (std::size_t i = 0; i < profile.powers.size(); ++i) {
    if (profile.powers[i] > tau) profile.peak_indices.push_back(i);
  }

  ProbeResult result;
  const std::size_t n = codebook.codewords.front().size();
  if (profile.peak_indices.empty()) {
    result.config = HrisConfig::idle(n, Branch::absorption);
    result.profile = std::move(profile);
    return result;
  }

  CVector acc = CVector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i : profile.peak_indices) {
    const double delta = weighting == Combining::hard ? 1.0 : profile.powers[i];
    acc += delta * codebook.codewords[i].phases;
  }
  HrisConfig combined{unit_modulus(acc), Branch::absorption, std::nullopt};
  result.config = quantize(combined, codebook.bits);
  result.profile = std::move(profile);
  result.source_detected = true;
  return result;
}

}  // namespace

ProbeResult probe(const Codebook& codebook, const CVector& incident, double eta,
                  double noise_var, double tau, Combining weighting) {
  if (codebook.size() == 0) throw HrisError("empty codebook");
  if (tau < noise_var) throw HrisError("threshold must not be below the noise floor");
  return combine(codebook, sweep(codebook, incident, eta, noise_var), tau, weighting);
}

ProbeResult probe_relative(const Codebook& codebook, const CVector& incident, double eta,
                           double noise_var, double factor, Combining weighting) {
  if (codebook.size() == 0) throw HrisError("empty codebook");
  PowerProfile profile = sweep(codebook, incident, eta, noise_var);
  const double tau = std::max(relative_threshold(profile.powers, factor), noise_var);
  return combine(codebook, std::move(profile), tau, weighting);
}

HrisConfig compose_reflection(const HrisConfig& phi_b, const HrisConfig& phi_u,
                              std::optional<int> bits) {
  if (phi_b.size() != phi_u.size())
    throw HrisError("compose_reflection: configurations differ in length");
  HrisConfig theta{unit_modulus(phi_u.phases.conjugate().cwiseProduct(phi_b.phases)),
                   Branch::reflection, std::nullopt};
  return bits ? quantize(theta, *bits) : theta;
}

CVector aggregate_ue_channel(const ChannelSet& channels, OracleMode mode) {
  CVector sum = CVector::Zero(static_cast<Eigen::Index>(channels.n_ris()));
  for (const auto& hk : channels.h) {
    if (mode == OracleMode::wares) {
      sum += hk;
    } else {
      const double nrm = hk.norm();
      if (nrm > 0.0) sum += hk / nrm;
    }
  }
  return sum;
}

CVector equivalent_channel(const CVector& h_sum, const CVector& a_ris_bs) {
  return h_sum.conjugate().cwiseProduct(a_ris_bs);
}

HrisConfig oracle_config(const ChannelSet& channels, OracleMode mode) {
  const CVector eq = equivalent_channel(aggregate_ue_channel(channels, mode), channels.a_ris_bs);
  return HrisConfig{unit_modulus(eq), Branch::reflection, std::nullopt};
}

double reflected_gain(const CVector& theta, const CVector& equivalent) {
  return std::norm(theta.dot(equivalent));
}

}  // namespace hris
