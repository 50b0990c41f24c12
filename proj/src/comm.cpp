#include "hris/comm.hpp"

#include <algorithm>
#include <cmath>

namespace hris {

CMatrix effective_channels(const ChannelSet& channels, const HrisConfig& theta, double eta) {
  if (theta.size() != channels.n_ris())
    throw CommError("effective_channels: configuration length does not match the HRIS");
  const auto k_count = static_cast<Eigen::Index>(channels.n_ue());
  const auto m = static_cast<Eigen::Index>(channels.n_bs());
  const double s = std::sqrt(eta);
  const CMatrix g_adj = channels.G.adjoint();
  CMatrix H(m, k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    // Theta = diag(conj(theta)), so Theta^H h_k = theta o h_k.
    H.col(k) = channels.h_d[ku] + s * (g_adj * theta.phases.cwiseProduct(channels.h[ku]));
  }
  return H;
}

Precoder rzf_precoder(const CMatrix& h_eff, double power, double noise_var) {
  if (!(power > 0.0)) throw CommError("transmit power must be positive");
  const auto m = h_eff.rows();
  const double mu = static_cast<double>(h_eff.cols()) * noise_var / power;
  const CMatrix gram = h_eff * h_eff.adjoint() + mu * CMatrix::Identity(m, m);
  const CMatrix unnorm = gram.ldlt().solve(h_eff);
  const double fro = unnorm.norm();
  Precoder p;
  p.total_power = power;
  p.regularizer = mu;
  p.W = fro > 0.0 ? CMatrix(std::sqrt(power) * unnorm / fro) : CMatrix::Zero(m, h_eff.cols());
  return p;
}

LinkBudget evaluate(const ChannelSet& channels, const HrisConfig& theta, const Precoder& precoder,
                    double eta, double noise_var) {
  const CMatrix H = effective_channels(channels, theta, eta);
  if (precoder.W.rows() != H.rows() || precoder.W.cols() != H.cols())
    throw CommError("evaluate: precoder dimensions do not match the channels");
  const CMatrix rx = H.adjoint() * precoder.W;  // (k, j) = g_k^H w_j

  LinkBudget out;
  const auto k_count = H.cols();
  out.sinr.resize(static_cast<std::size_t>(k_count));
  out.direct_power_fraction.resize(static_cast<std::size_t>(k_count));
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double signal = std::norm(rx(k, k));
    double interference = 0.0;
    for (Eigen::Index j = 0; j < k_count; ++j) {
      if (j != k) interference += std::norm(rx(k, j));
    }
    const auto ku = static_cast<std::size_t>(k);
    out.sinr[ku] = signal / (noise_var + interference);
    out.sum_rate += std::log2(1.0 + out.sinr[ku]);
    const double direct = std::norm(channels.h_d[ku].dot(precoder.W.col(k)));
    out.direct_power_fraction[ku] = signal > 0.0 ? std::clamp(direct / signal, 0.0, 1.0) : 0.0;
  }
  return out;
}

}  // namespace hris
