#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "gfra/rng.hpp"

namespace gfra {

inline double db_to_linear(double x_db) noexcept { return std::pow(10.0, x_db / 10.0); }

inline double linear_to_db(double ratio) {
  if (!(ratio > 0.0)) throw std::domain_error("linear_to_db requires a positive ratio");
  return 10.0 * std::log10(ratio);
}

enum class Fading { rayleigh_block, none };

struct LinkBudget {
  double avg_snr_db = 9.0;
  Fading fading = Fading::rayleigh_block;

  double avg_snr_linear() const noexcept { return db_to_linear(avg_snr_db); }
};

// Open-loop power control with per-attempt boosting:
//   P = min{ P_max, P_0 + 10 log10(M) + alpha * PL + g(k) },
// g(1) = 0 by convention; attempts beyond the configured boost sequence hold
// the last step (saturation).
struct PowerControlConfig {
  double p_max_dbm = 23.0;
  double p0_dbm = -90.0;
  double alpha = 1.0;
  std::vector<double> boost_steps_db = {0.0};

  void validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0,1]");
    if (boost_steps_db.empty()) throw std::invalid_argument("boost_steps_db must not be empty");
    if (!std::is_sorted(boost_steps_db.begin(), boost_steps_db.end()))
      throw std::invalid_argument("boost_steps_db must be non-decreasing");
  }

  double boost_db(int attempt_k) const noexcept {
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(attempt_k - 1),
                                                boost_steps_db.size() - 1);
    return boost_steps_db[i];
  }
};

inline double tx_power_dbm(const PowerControlConfig& pc, int m_rb, double pl_db, int attempt_k) {
  if (m_rb < 1) throw std::invalid_argument("m_rb must be >= 1");
  if (attempt_k < 1) throw std::invalid_argument("attempt_k must be >= 1");
  const double uncapped =
      pc.p0_dbm + 10.0 * std::log10(static_cast<double>(m_rb)) + pc.alpha * pl_db + pc.boost_db(attempt_k);
  return std::min(pc.p_max_dbm, uncapped);
}

// |h|^2 under Rayleigh block fading: unit-mean exponential, constant within a
// slot, independent across slots and users.
inline double channel_gain_sample(Philox4x32& rng) noexcept { return exp_unit(rng); }

inline double sinr(double desired_rx_power, std::span<const double> interferer_rx_powers,
                   double noise_power) {
  if (!(noise_power > 0.0)) throw std::invalid_argument("noise_power must be positive");
  double denom = noise_power;
  for (double p : interferer_rx_powers) denom += p;
  return desired_rx_power / denom;
}

}  // namespace gfra
