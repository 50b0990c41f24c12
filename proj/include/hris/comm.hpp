#pragma once

#include <vector>

#include "hris/channel.hpp"
#include "hris/hris.hpp"

namespace hris {

class CommError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct Precoder {
  CMatrix W;  // M x K
  double total_power = 0.0;
  double regularizer = 0.0;
};

struct LinkBudget {
  std::vector<double> sinr;
  double sum_rate = 0.0;
  std::vector<double> direct_power_fraction;
};

/// M x K matrix whose column k is h_D,k + sqrt(eta) G^H Theta^H h_k.
CMatrix effective_channels(const ChannelSet& channels, const HrisConfig& theta, double eta);

/// W = sqrt(P) (H H^H + mu I)^-1 H / ||(H H^H + mu I)^-1 H||_F with mu = K noise / P.
Precoder rzf_precoder(const CMatrix& h_eff, double power, double noise_var);

LinkBudget evaluate(const ChannelSet& channels, const HrisConfig& theta, const Precoder& precoder,
                    double eta, double noise_var);

}  // namespace hris
