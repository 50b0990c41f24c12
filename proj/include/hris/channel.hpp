#pragma once

#include <random>
#include <vector>

#include "hris/geometry.hpp"

namespace hris {

using Rng = std::mt19937_64;

class ChannelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct PathlossModel {
  double gamma0 = 1.0;
  double d0 = 1.0;
  double chi_los = 2.0;
  double chi_nlos = 4.0;

  void validate() const;
};

enum class BlockageMode { analytic, sampled };

/// Cylindrical blockers dropped as a PPP on the ground plane.
struct BlockageField {
  double density = 0.3;          // blockers per m^2
  double blocker_height = 1.8;   // m
  double blocker_diameter = 0.6; // m
  BlockageMode mode = BlockageMode::analytic;

  void validate() const;
};

/// gamma0 * (d0 / |p - q|)^exponent
double pathloss(const Vec3& p, const Vec3& q, const PathlossModel& model, double exponent);

/// Fraction of the ground projection of the link over which the ray is below
/// the blocker height.
double shadow_fraction(double h_tx, double h_rx, double blocker_height);

/// Closed-form LoS probability of a link crossing the blocker field.
double los_probability(const Vec3& tx, const Vec3& rx, const BlockageField& field);

/// Drops blockers explicitly around the link and reports whether any of them
/// intersects the ray.
bool sample_los(const Vec3& tx, const Vec3& rx, const BlockageField& field, Rng& rng);

/// Draws one LoS/NLoS outcome according to field.mode.
bool draw_los(const Vec3& tx, const Vec3& rx, const BlockageField& field, Rng& rng);

struct Deployment {
  Radio radio;
  ArrayGeometry bs;
  ArrayGeometry ris;
  std::vector<Vec3> ues;
  PathlossModel pathloss;
  BlockageField blockage;
  bool blockage_enabled = true;
  bool bs_ris_blockable = false;
};

struct ChannelSet {
  CMatrix G;                 // N x M, BS -> HRIS
  std::vector<CVector> h;    // K vectors of length N, HRIS <-> UE
  std::vector<CVector> h_d;  // K vectors of length M, BS -> UE
  bool bs_ris_los = true;
  std::vector<bool> ris_ue_los;
  std::vector<bool> bs_ue_los;
  // Kept so that the BS beam toward the HRIS and a_R(b) can be rebuilt.
  CVector a_ris_bs;          // a_R(b)
  CVector a_bs_ris;          // a_BS(r)
  double gain_bs_ris = 0.0;  // gamma(b, r)

  std::size_t n_ris() const { return static_cast<std::size_t>(G.rows()); }
  std::size_t n_bs() const { return static_cast<std::size_t>(G.cols()); }
  std::size_t n_ue() const { return h.size(); }
};

ChannelSet realize_channels(const Deployment& dep, Rng& rng);

}  // namespace hris
