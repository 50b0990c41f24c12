#include "hris/channel.hpp"

#include <algorithm>
#include <cmath>

namespace hris {

void PathlossModel::validate() const {
  if (!(gamma0 > 0.0)) throw ChannelError("gamma0 must be positive");
  if (!(d0 > 0.0)) throw ChannelError("d0 must be positive");
  if (!(chi_los >= 0.0) || !(chi_nlos >= chi_los))
    throw ChannelError("pathloss exponents must satisfy chi_nlos >= chi_los >= 0");
}

void BlockageField::validate() const {
  if (!(density >= 0.0)) throw ChannelError("blocker density must be non-negative");
  if (!(blocker_height > 0.0) || !(blocker_diameter > 0.0))
    throw ChannelError("blocker height and diameter must be positive");
}

double pathloss(const Vec3& p, const Vec3& q, const PathlossModel& model, double exponent) {
  const double dist = (p - q).norm();
  if (dist == 0.0) throw ChannelError("pathloss: zero link distance");
  return model.gamma0 * std::pow(model.d0 / dist, exponent);
}

double shadow_fraction(double h_tx, double h_rx, double blocker_height) {
  if (h_tx == h_rx) return h_tx < blocker_height ? 1.0 : 0.0;
  // Orient so that the fraction is measured from the lower endpoint.
  const double lo = std::min(h_tx, h_rx);
  const double hi = std::max(h_tx, h_rx);
  return std::clamp((blocker_height - lo) / (hi - lo), 0.0, 1.0);
}

double los_probability(const Vec3& tx, const Vec3& rx, const BlockageField& field) {
  const double d2d = std::hypot(tx.x() - rx.x(), tx.y() - rx.y());
  if (d2d == 0.0 || field.density == 0.0) return 1.0;
  const double frac = shadow_fraction(tx.z(), rx.z(), field.blocker_height);
  const double p = std::exp(-field.density * field.blocker_diameter * d2d * frac);
  return std::clamp(p, 0.0, 1.0);
}

bool sample_los(const Vec3& tx, const Vec3& rx, const BlockageField& field, Rng& rng) {
  const double dx = tx.x() - rx.x();
  const double dy = tx.y() - rx.y();
  const double d2d = std::hypot(dx, dy);
  if (d2d == 0.0 || field.density == 0.0) return true;

  const double half = 0.5 * field.blocker_diameter;
  const double xmin = std::min(tx.x(), rx.x()) - half;
  const double ymin = std::min(tx.y(), rx.y()) - half;
  const double w = std::abs(dx) + 2.0 * half;
  const double hgt = std::abs(dy) + 2.0 * half;

  std::poisson_distribution<long> count(field.density * w * hgt);
  std::uniform_real_distribution<double> ux(xmin, xmin + w);
  std::uniform_real_distribution<double> uy(ymin, ymin + hgt);
  const long n = count(rng);

  const double ex = dx / d2d;
  const double ey = dy / d2d;
  bool los = true;
  for (long i = 0; i < n; ++i) {
    const double cx = ux(rng) - rx.x();
    const double cy = uy(rng) - rx.y();
    const double t = cx * ex + cy * ey;  // along-link distance from rx
    if (t < 0.0 || t > d2d) continue;
    const double perp = std::abs(cx * ey - cy * ex);
    if (perp > half) continue;
    const double ray_height = rx.z() + (tx.z() - rx.z()) * t / d2d;
    if (ray_height < field.blocker_height) los = false;
  }
  return los;
}

bool draw_los(const Vec3& tx, const Vec3& rx, const BlockageField& field, Rng& rng) {
  if (field.mode == BlockageMode::sampled) return sample_los(tx, rx, field, rng);
  std::bernoulli_distribution los(los_probability(tx, rx, field));
  return los(rng);
}

ChannelSet realize_channels(const Deployment& dep, Rng& rng) {
  dep.pathloss.validate();
  if (dep.blockage_enabled) dep.blockage.validate();
  if (dep.ues.empty()) throw ChannelError("at least one UE is required");

  const Vec3& b = dep.bs.center;
  const Vec3& r = dep.ris.center;
  auto link_los = [&](const Vec3& tx, const Vec3& rx) {
    return dep.blockage_enabled ? draw_los(tx, rx, dep.blockage, rng) : true;
  };
  auto gain = [&](const Vec3& p, const Vec3& q, bool los) {
    return pathloss(p, q, dep.pathloss, los ? dep.pathloss.chi_los : dep.pathloss.chi_nlos);
  };

  ChannelSet ch;
  ch.bs_ris_los = dep.bs_ris_blockable ? link_los(b, r) : true;
  ch.gain_bs_ris = gain(b, r, ch.bs_ris_los);
  ch.a_ris_bs = array_response(dep.ris, b, dep.radio);
  ch.a_bs_ris = array_response(dep.bs, r, dep.radio);
  ch.G = std::sqrt(ch.gain_bs_ris) * ch.a_ris_bs * ch.a_bs_ris.adjoint();

  const std::size_t k_count = dep.ues.size();
  ch.h.reserve(k_count);
  ch.h_d.reserve(k_count);
  for (const Vec3& u : dep.ues) {
    const bool ris_los = link_los(r, u);
    const bool bs_los = link_los(b, u);
    ch.ris_ue_los.push_back(ris_los);
    ch.bs_ue_los.push_back(bs_los);
    ch.h.push_back(std::sqrt(gain(u, r, ris_los)) * array_response(dep.ris, u, dep.radio));
    ch.h_d.push_back(std::sqrt(gain(b, u, bs_los)) * array_response(dep.bs, u, dep.radio));
  }
  return ch;
}

}  // namespace hris
