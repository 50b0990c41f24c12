#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hris/channel.hpp"
#include "hris/geometry.hpp"

namespace hris {

class HrisError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class Branch { reflection, absorption };

/// Per-element complex weights of one HRIS phase-shifter bank.
///
/// On the reflection branch the applied diagonal matrix is diag(conj(phases)),
/// so phases equal to exp(j*angle(x)) coherently combine the vector x.
struct HrisConfig {
  CVector phases;
  Branch branch = Branch::reflection;
  std::optional<int> bits;

  std::size_t size() const { return static_cast<std::size_t>(phases.size()); }

  static HrisConfig idle(std::size_t n, Branch branch);
};

/// Phase angle of z folded into [0, 2*pi).
double wrapped_angle(cdouble z);

/// Index m of the nearest phase 2*pi*m/2^bits (ties to the smaller angle).
unsigned phase_index(cdouble z, int bits);

/// Snap every element to the nearest point of the 2^bits phase grid, unit modulus.
HrisConfig quantize(const HrisConfig& config, int bits);

/// Phase-grid indices of an already quantized configuration.
std::vector<unsigned> phase_indices(const HrisConfig& config);

/// Element-wise projection onto unit modulus; zero entries map to 1.
CVector unit_modulus(const CVector& v);

struct Direction {
  double azimuth = 0.0;
  double elevation = 0.0;
};

struct Codebook {
  std::vector<HrisConfig> codewords;
  std::vector<Direction> directions;
  int bits = 2;

  std::size_t size() const { return codewords.size(); }
};

/// Azimuth grid over (-pi/2, pi/2) and elevation grid over (-pi/4, pi/4),
/// both at cell midpoints.
std::vector<Direction> codebook_directions(std::size_t n_az, std::size_t n_el);

/// Absorption-branch codeword steering the sensed beam toward dir.
HrisConfig steering_codeword(const ArrayGeometry& geom, const Radio& radio,
                             const Direction& dir, int bits);

Codebook build_codebook(const ArrayGeometry& geom, const Radio& radio, std::size_t n_az,
                        std::size_t n_el, int bits);

/// (1 - eta) |phi^H v|^2 + noise_var
double sensed_power(const HrisConfig& config_abs, const CVector& incident, double eta,
                    double noise_var);

enum class Combining { hard, soft };

struct PowerProfile {
  std::vector<double> powers;
  double threshold = 0.0;
  std::vector<std::size_t> peak_indices;
};

struct ProbeResult {
  PowerProfile profile;
  HrisConfig config;
  bool source_detected = false;
};

/// Threshold set `factor` times above the median of the profile.
double relative_threshold(const std::vector<double>& powers, double factor);

/// Beam sweep over the codebook followed by peak combining.
///
/// The combined vector sum(delta_i * c_i) is projected to unit modulus and
/// then quantized to the codebook's bit depth. With no peak above tau the
/// idle configuration is returned and source_detected is false.
ProbeResult probe(const Codebook& codebook, const CVector& incident, double eta,
                  double noise_var, double tau, Combining weighting);

/// Sweep and threshold with tau = factor * median(profile).
ProbeResult probe_relative(const Codebook& codebook, const CVector& incident, double eta,
                           double noise_var, double factor, Combining weighting);

/// Reflection configuration conj(phi_U) o phi_B, quantized when bits is set.
HrisConfig compose_reflection(const HrisConfig& phi_b, const HrisConfig& phi_u,
                              std::optional<int> bits);

enum class OracleMode { ares, wares };

/// Aggregate UE channel: sum of h_k (weighted) or of h_k/|h_k| (unweighted).
CVector aggregate_ue_channel(const ChannelSet& channels, OracleMode mode);

/// exp(j*angle(conj(h_sum) o a_R(b))) with perfect channel knowledge.
HrisConfig oracle_config(const ChannelSet& channels, OracleMode mode);

/// |theta^H (conj(h_sum) o a_R(b))|^2, the reflected-path gain up to z_R.
double reflected_gain(const CVector& theta, const CVector& equivalent_channel);

/// Equivalent channel conj(h_sum) o a_R(b).
CVector equivalent_channel(const CVector& h_sum, const CVector& a_ris_bs);

}  // namespace hris
