#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

namespace gfra {

struct ConfInterval {
  double lower = 0.0;
  double upper = 1.0;
  double confidence = 0.95;
};

// Exact Clopper-Pearson two-sided interval via the beta-quantile relation.
// Wald-style approximations are invalid for the loss counts this simulator
// reports (a handful of events out of millions of trials).
inline ConfInterval cp_interval(std::uint64_t losses, std::uint64_t trials,
                                double confidence = 0.95) {
  if (trials < 1) throw std::invalid_argument("cp_interval requires trials >= 1");
  if (losses > trials) throw std::invalid_argument("losses must not exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("confidence must lie in (0,1)");
  const double alpha = (1.0 - confidence) / 2.0;
  ConfInterval ci;
  ci.confidence = confidence;
  const auto k = static_cast<double>(losses);
  const auto n = static_cast<double>(trials);
  ci.lower = losses == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha);
  ci.upper = losses == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha);
  return ci;
}

// Empirical survival curve P(latency > t). Deadline misses never deliver and
// therefore sit in the tail at every t. Support is kept at exact sample
// values (latencies live on the mini-slot grid; no binning).
class Ccdf {
 public:
  static Ccdf from_samples(std::span<const double> samples_ms, std::uint64_t miss_count) {
    std::map<double, std::uint64_t> hist;
    for (double s : samples_ms) ++hist[s];
    return from_histogram(hist, miss_count);
  }

  static Ccdf from_histogram(const std::map<double, std::uint64_t>& hist,
                             std::uint64_t miss_count) {
    Ccdf c;
    c.misses_ = miss_count;
    for (const auto& [v, cnt] : hist) {
      if (cnt == 0) continue;
      c.support_.push_back(v);
      c.counts_.push_back(cnt);
      c.total_ += cnt;
    }
    c.total_ += miss_count;
    if (c.total_ == 0) throw std::invalid_argument("ccdf requires at least one sample or miss");
    return c;
  }

  static Ccdf merge(const Ccdf& a, const Ccdf& b) {
    std::map<double, std::uint64_t> hist;
    for (std::size_t i = 0; i < a.support_.size(); ++i) hist[a.support_[i]] += a.counts_[i];
    for (std::size_t i = 0; i < b.support_.size(); ++i) hist[b.support_[i]] += b.counts_[i];
    return from_histogram(hist, a.misses_ + b.misses_);
  }

  // Right-continuous survival: counts samples strictly greater than t, plus
  // all misses.
  double survival_at(double t) const {
    const auto it = std::upper_bound(support_.begin(), support_.end(), t);
    std::uint64_t above = misses_;
    for (auto i = static_cast<std::size_t>(it - support_.begin()); i < counts_.size(); ++i)
      above += counts_[i];
    return static_cast<double>(above) / static_cast<double>(total_);
  }

  const std::vector<double>& support() const { return support_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t misses() const { return misses_; }
  std::uint64_t total() const { return total_; }

 private:
  std::vector<double> support_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t misses_ = 0;
  std::uint64_t total_ = 0;
};

inline double outage_at(const Ccdf& ccdf, double budget_ms) { return ccdf.survival_at(budget_ms); }

struct PlrPoint {
  double load_g = 0.0;
  std::uint64_t frames = 0;
  std::uint64_t packets = 0;
  std::uint64_t losses = 0;
  double plr = 0.0;
  ConfInterval ci;
  double mean_sic_iters = 0.0;
};

using PlrCurve = std::vector<PlrPoint>;

// One batched measurement of PLR at a given load. `point_index` identifies
// the probe so the runner can derive an independent RNG family per point;
// successive calls with the same index must continue the same sample stream.
using LoadProbe =
    std::function<PlrPoint(double load_g, std::uint64_t point_index, std::uint64_t frames)>;

struct SupportedLoadOptions {
  double target_plr = 1e-5;
  double rel_tol = 0.1;
  double g_lo = 0.5;
  double g_hi = 4.0;
  double confidence = 0.95;
  std::uint64_t batch_frames = 20000;
  std::uint64_t max_frames_per_point = 2000000;
  std::uint64_t total_frame_budget = 10000000;
};

struct SupportedLoadResult {
  bool found = false;
  double g_star = 0.0;
  PlrPoint below;  // certifying measurement at g_star
  PlrPoint above;  // certifying measurement at the bracket top
  PlrCurve probes;
  std::string message;
};

namespace detail {
enum class LoadClass { below, above, undecided };
}

// Bisection for the largest load whose PLR is certified below target: a point
// counts as below/above only when its Clopper-Pearson interval separates from
// the target on the corresponding side. Batches are added to a point until it
// separates or its frame budget runs out.
inline SupportedLoadResult supported_load(const LoadProbe& probe,
                                          const SupportedLoadOptions& opt) {
  SupportedLoadResult res;
  std::uint64_t frames_spent = 0;
  std::uint64_t next_point_index = 0;

  const auto classify = [&](double g, PlrPoint& out) {
    const std::uint64_t point_index = next_point_index++;
    PlrPoint acc;
    while (true) {
      const std::uint64_t room =
          std::min(opt.max_frames_per_point - acc.frames,
                   opt.total_frame_budget > frames_spent ? opt.total_frame_budget - frames_spent
                                                         : 0);
      const std::uint64_t batch = std::min(opt.batch_frames, room);
      if (batch == 0) break;
      acc = probe(g, point_index, acc.frames + batch);
      frames_spent += batch;
      acc.ci = cp_interval(acc.losses, acc.packets, opt.confidence);
      acc.plr = static_cast<double>(acc.losses) / static_cast<double>(acc.packets);
      if (acc.ci.upper < opt.target_plr || acc.ci.lower > opt.target_plr) break;
    }
    out = acc;
    res.probes.push_back(acc);
    if (acc.packets > 0 && acc.ci.upper < opt.target_plr) return detail::LoadClass::below;
    if (acc.packets > 0 && acc.ci.lower > opt.target_plr) return detail::LoadClass::above;
    return detail::LoadClass::undecided;
  };

  double lo = opt.g_lo;
  double hi = opt.g_hi;
  PlrPoint lo_pt, hi_pt;
  res.probes.reserve(16);

  if (classify(lo, lo_pt) != detail::LoadClass::below) {
    res.message = "no crossing: PLR at bracket start G=" + std::to_string(lo) +
                  " not certified below target (plr=" + std::to_string(lo_pt.plr) + ")";
    res.below = lo_pt;
    return res;
  }
  if (classify(hi, hi_pt) != detail::LoadClass::above) {
    res.message = "no crossing: PLR at bracket end G=" + std::to_string(hi) +
                  " not certified above target (plr=" + std::to_string(hi_pt.plr) + ")";
    res.above = hi_pt;
    return res;
  }

  while (hi - lo > opt.rel_tol * lo && frames_spent < opt.total_frame_budget) {
    const double mid = 0.5 * (lo + hi);
    PlrPoint mid_pt;
    const auto cls = classify(mid, mid_pt);
    if (cls == detail::LoadClass::below) {
      lo = mid;
      lo_pt = mid_pt;
    } else if (cls == detail::LoadClass::above) {
      hi = mid;
      hi_pt = mid_pt;
    } else {
      res.message = "bisection stopped: PLR at G=" + std::to_string(mid) +
                    " statistically indistinguishable from target within the frame budget";
      break;
    }
  }

  res.found = true;
  res.g_star = lo;
  res.below = lo_pt;
  res.above = hi_pt;
  return res;
}

}  // namespace gfra
