#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace gfra {

// One coded transmission unit: k information bits carried over n complex
// channel uses (resource elements).
struct FblCodeSpec {
  int k_bits = 256;
  int n_re = 240;

  void validate() const {
    if (k_bits < 1) throw std::invalid_argument("k_bits must be >= 1");
    if (n_re < 1) throw std::invalid_argument("n_re must be >= 1");
  }
};

// Standard normal tail Q(x) = P(Z > x). Evaluated in extended precision so
// the relative error stays below 1e-12 across |x| <= 38; beyond that the
// value is outside double range and is clamped to {0, 1}.
inline double q_function(double x) noexcept {
  if (x > 38.0) return 0.0;
  if (x < -38.0) return 1.0;
  constexpr long double inv_sqrt2 = 0.70710678118654752440084436210485L;
  return static_cast<double>(0.5L * erfcl(static_cast<long double>(x) * inv_sqrt2));
}

namespace detail {
constexpr double log2e = 1.4426950408889634074;  // log2(e)

inline double capacity_bits(double s) noexcept { return std::log2(1.0 + s); }

// Channel dispersion of the complex AWGN channel, in bits^2.
inline double dispersion_bits2(double s) noexcept {
  const double t = 1.0 + s;
  return (1.0 - 1.0 / (t * t)) * (log2e * log2e);
}
}  // namespace detail

// Normal approximation to the block error probability of an (n, 2^k) code at
// SINR s over the complex AWGN channel:
//
//   eps = Q( (n C(s) - k + 0.5 log2(n)) / sqrt(n V(s)) ),
//   C(s) = log2(1 + s),   V(s) = (1 - (1+s)^-2) log2(e)^2.
//
// The +0.5 log2(n) term is the usual second-order rate correction. s = 0 has
// zero capacity and dispersion and is handled explicitly as eps = 1.
inline double per_normal_approx(const FblCodeSpec& spec, double sinr_linear) {
  if (sinr_linear < 0.0) throw std::invalid_argument("sinr must be >= 0");
  if (sinr_linear == 0.0) return 1.0;
  const double n = spec.n_re;
  const double k = spec.k_bits;
  const double v = detail::dispersion_bits2(sinr_linear);
  if (v <= 0.0) return 1.0;
  const double num = n * detail::capacity_bits(sinr_linear) - k + 0.5 * std::log2(n);
  return q_function(num / std::sqrt(n * v));
}

// Joint decoding over parallel channel segments (one per slot): mutual
// information and dispersion accumulate across segments,
//
//   eps = Q( (sum_i n_i C(s_i) - k + 0.5 log2(sum_i n_i)) / sqrt(sum_i n_i V(s_i)) ).
//
// Reduces bit-exactly to per_normal_approx for a single segment. When every
// segment has zero SINR the dispersion vanishes and the limit is taken by the
// sign of the numerator.
inline double per_joint(std::span<const int> slot_lengths, std::span<const double> slot_sinrs,
                        int k_bits) {
  if (slot_lengths.empty() || slot_lengths.size() != slot_sinrs.size())
    throw std::domain_error("per_joint requires matching non-empty slot lists");
  double mi = 0.0;
  double disp = 0.0;
  double n_total = 0.0;
  for (std::size_t i = 0; i < slot_lengths.size(); ++i) {
    const double n_i = slot_lengths[i];
    const double s_i = slot_sinrs[i];
    if (s_i < 0.0) throw std::invalid_argument("sinr must be >= 0");
    mi += n_i * detail::capacity_bits(s_i);
    disp += n_i * detail::dispersion_bits2(s_i);
    n_total += n_i;
  }
  const double num = mi - k_bits + 0.5 * std::log2(n_total);
  if (disp <= 0.0) return num > 0.0 ? 0.0 : 1.0;
  return q_function(num / std::sqrt(disp));
}

struct BlocklengthResult {
  bool feasible = false;
  int n_re = 0;
};

// Smallest blocklength n with per_normal_approx((k, n), s) <= target_eps.
// The Q argument is strictly increasing in n, so eps is strictly decreasing
// and a doubling bracket plus bisection is exact. Returns infeasible when no
// n up to n_cap reaches the target.
inline BlocklengthResult required_blocklength(int k_bits, double target_eps, double sinr_linear,
                                              int n_cap = 1 << 20) {
  if (!(target_eps > 0.0 && target_eps < 1.0))
    throw std::invalid_argument("target_eps must lie in (0,1)");
  if (!(sinr_linear > 0.0)) throw std::invalid_argument("sinr must be positive");
  const auto eps_at = [&](int n) { return per_normal_approx({k_bits, n}, sinr_linear); };
  if (eps_at(1) <= target_eps) return {true, 1};
  int hi = 1;
  while (eps_at(hi) > target_eps) {
    if (hi > n_cap) return {false, 0};
    hi *= 2;
  }
  int lo = hi / 2;  // eps(lo) > target, eps(hi) <= target
  while (lo + 1 < hi) {
    const int mid = lo + (hi - lo) / 2;
    (eps_at(mid) <= target_eps ? hi : lo) = mid;
  }
  return hi <= n_cap ? BlocklengthResult{true, hi} : BlocklengthResult{false, 0};
}

}  // namespace gfra
