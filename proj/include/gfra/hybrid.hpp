#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "gfra/fbl.hpp"
#include "gfra/harq.hpp"
#include "gfra/parallel.hpp"
#include "gfra/phy.hpp"
#include "gfra/rng.hpp"
#include "gfra/stats.hpp"
#include "gfra/timing.hpp"

namespace gfra {

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SharedDecodeRule { collision_channel, sinr_based };
enum class RetxSelection { uniform_random, fixed_sequence };

// Dedicated initial transmission plus blind retransmissions over a shared
// pool of R resources, resolved with successive interference cancellation.
struct HybridConfig {
  int n_users = 10;   // N
  int pool_size = 1;  // R
  int attempts = 2;   // d, total including the dedicated initial transmission
  double initial_bler = 0.1;
  double shared_bler = 0.0;  // residual error on a collision-free pool resource
  SharedDecodeRule decode_rule = SharedDecodeRule::collision_channel;
  bool blind = true;
  Combining combining = Combining::chase;
  RetxSelection retx = RetxSelection::uniform_random;
  FblCodeSpec code;  // sinr_based rule only
  LinkBudget link;   // sinr_based rule only

  void validate() const {
    if (n_users < 1) throw ConfigError("n_users must be >= 1");
    if (attempts < 1) throw ConfigError("attempts must be >= 1");
    if (pool_size < 1 && attempts > 1)
      throw ConfigError("pool_size must be >= 1 when retransmissions are configured");
    if (pool_size < 0) throw ConfigError("pool_size must be >= 0");
    if (initial_bler < 0.0 || initial_bler > 1.0) throw ConfigError("initial_bler must lie in [0,1]");
    if (shared_bler < 0.0 || shared_bler > 1.0) throw ConfigError("shared_bler must lie in [0,1]");
    code.validate();
  }
};

// Randomness of one frame, separated from resolution so the SIC fixed point
// can be recomputed under different iteration orders on identical draws.
struct HybridFrameDraws {
  std::vector<double> u;            // coupled uniform per user
  std::vector<int> pool_choice;     // (attempts-1) x n_users, resource per round/user
  std::vector<double> gain;         // attempts x n_users (sinr_based with fading), else empty
};

inline HybridFrameDraws draw_hybrid_frame(const HybridConfig& cfg, Philox4x32& rng) {
  HybridFrameDraws d;
  d.u.resize(cfg.n_users);
  for (auto& u : d.u) u = uniform01(rng);
  d.pool_choice.assign(static_cast<std::size_t>(std::max(0, cfg.attempts - 1)) * cfg.n_users, 0);
  for (int r = 1; r < cfg.attempts; ++r) {
    for (int usr = 0; usr < cfg.n_users; ++usr) {
      int& q = d.pool_choice[static_cast<std::size_t>(r - 1) * cfg.n_users + usr];
      if (cfg.retx == RetxSelection::uniform_random) {
        q = std::min(cfg.pool_size - 1,
                     static_cast<int>(uniform01(rng) * static_cast<double>(cfg.pool_size)));
      } else {
        q = (usr + r - 1) % cfg.pool_size;
      }
    }
  }
  if (cfg.decode_rule == SharedDecodeRule::sinr_based && cfg.link.fading == Fading::rayleigh_block) {
    d.gain.resize(static_cast<std::size_t>(cfg.attempts) * cfg.n_users);
    for (auto& g : d.gain) g = channel_gain_sample(rng);
  }
  return d;
}

enum class SicOrder { synchronous, sequential };

struct HybridUserOutcome {
  bool delivered = false;
  int delivering_round = -1;              // 0 = dedicated, r >= 1 = shared round r
  std::int64_t latency_minislots = -1;    // arrival to end of BS processing
  int attempts_transmitted = 0;
};

struct HybridFrameResult {
  std::vector<HybridUserOutcome> users;
  int sic_iterations = 0;
};

namespace detail {

struct HybridSic {
  const HybridConfig& cfg;
  const HybridFrameDraws& draws;
  std::vector<std::uint8_t> decoded;
  // transmissions per shared round r (1-based): participant flag per user
  std::vector<std::uint8_t> participated;  // (attempts-1) x n_users

  double gain_at(int round, int user) const {
    return draws.gain.empty() ? 1.0
                              : draws.gain[static_cast<std::size_t>(round) * cfg.n_users + user];
  }
  int choice_at(int round, int user) const {
    return draws.pool_choice[static_cast<std::size_t>(round - 1) * cfg.n_users + user];
  }
  bool took_part(int round, int user) const {
    return participated[static_cast<std::size_t>(round - 1) * cfg.n_users + user] != 0;
  }

  // Decode predicate for an undecoded user given the rounds observed so far.
  // Monotone in the decoded set: cancelling users only removes interference.
  bool can_decode(int user, int rounds_observed) const {
    if (cfg.decode_rule == SharedDecodeRule::collision_channel) {
      int clean = 0;
      for (int r = 1; r <= rounds_observed; ++r) {
        if (!took_part(r, user)) continue;
        const int q = choice_at(r, user);
        bool collided = false;
        for (int v = 0; v < cfg.n_users && !collided; ++v)
          collided = v != user && !decoded[v] && took_part(r, v) && choice_at(r, v) == q;
        if (!collided) ++clean;
      }
      if (clean == 0) return false;
      const double eps = cfg.combining == Combining::chase
                             ? cfg.initial_bler * std::pow(cfg.shared_bler, clean)
                             : cfg.shared_bler;
      return eps <= 1.0 - draws.u[user];
    }
    // sinr_based: dedicated copy plus every stored shared replica.
    const double snr = cfg.link.avg_snr_linear();
    double sum = snr * gain_at(0, user);
    double best = sum;
    for (int r = 1; r <= rounds_observed; ++r) {
      if (!took_part(r, user)) continue;
      const int q = choice_at(r, user);
      double interference = 0.0;
      for (int v = 0; v < cfg.n_users; ++v)
        if (v != user && !decoded[v] && took_part(r, v) && choice_at(r, v) == q)
          interference += snr * gain_at(r, v);
      const double s = snr * gain_at(r, user) / (1.0 + interference);
      sum += s;
      best = std::max(best, s);
    }
    const double eps = per_normal_approx(
        cfg.code, cfg.combining == Combining::chase ? sum : best);
    return eps <= 1.0 - draws.u[user];
  }
};

}  // namespace detail

// Round 0: every user transmits on its own dedicated resource. Rounds
// 1..d-1 follow in consecutive mini-slots with no feedback wait; each
// participant (all users when blind) picks one pool resource. After each
// round the receiver runs SIC to a fixed point over everything stored so
// far; cancellations in a later round can unlock replicas stored earlier.
inline HybridFrameResult resolve_hybrid_frame(const HybridConfig& cfg, const TimingConfig& timing,
                                              const HybridFrameDraws& draws,
                                              SicOrder order = SicOrder::synchronous,
                                              std::span<const int> sweep = {}) {
  const int n = cfg.n_users;
  HybridFrameResult res;
  res.users.assign(n, {});

  detail::HybridSic sic{cfg, draws, std::vector<std::uint8_t>(n, 0),
                        std::vector<std::uint8_t>(
                            static_cast<std::size_t>(std::max(0, cfg.attempts - 1)) * n, 0)};

  // Dedicated round: no contention.
  for (int u = 0; u < n; ++u) {
    res.users[u].attempts_transmitted = 1;
    double eps0 = cfg.initial_bler;
    if (cfg.decode_rule == SharedDecodeRule::sinr_based)
      eps0 = per_normal_approx(cfg.code, cfg.link.avg_snr_linear() * sic.gain_at(0, u));
    if (eps0 <= 1.0 - draws.u[u]) {
      sic.decoded[u] = 1;
      res.users[u].delivered = true;
      res.users[u].delivering_round = 0;
      res.users[u].latency_minislots = 1 + timing.bs_proc_minislots;
    }
  }

  std::vector<int> default_sweep;
  if (order == SicOrder::sequential && sweep.empty()) {
    default_sweep.resize(n);
    std::iota(default_sweep.begin(), default_sweep.end(), 0);
    sweep = default_sweep;
  }

  for (int r = 1; r < cfg.attempts; ++r) {
    for (int u = 0; u < n; ++u)
      if (cfg.blind || !sic.decoded[u]) {
        sic.participated[static_cast<std::size_t>(r - 1) * n + u] = 1;
        ++res.users[u].attempts_transmitted;
      }

    const auto deliver = [&](int u) {
      sic.decoded[u] = 1;
      res.users[u].delivered = true;
      res.users[u].delivering_round = r;
      res.users[u].latency_minislots = (r + 1) + timing.bs_proc_minislots;
    };

    if (order == SicOrder::synchronous) {
      std::vector<int> newly;
      while (true) {
        ++res.sic_iterations;
        newly.clear();
        for (int u = 0; u < n; ++u)
          if (!sic.decoded[u] && sic.can_decode(u, r)) newly.push_back(u);
        if (newly.empty()) break;
        for (int u : newly) deliver(u);
      }
    } else {
      bool changed = true;
      while (changed) {
        ++res.sic_iterations;
        changed = false;
        for (int u : sweep)
          if (!sic.decoded[u] && sic.can_decode(u, r)) {
            deliver(u);
            changed = true;
          }
      }
    }
  }
  return res;
}

inline HybridFrameResult simulate_hybrid_frame(const HybridConfig& cfg, const TimingConfig& timing,
                                               Philox4x32& rng) {
  const auto draws = draw_hybrid_frame(cfg, rng);
  return resolve_hybrid_frame(cfg, timing, draws);
}

struct HybridEstimate {
  std::uint64_t frames = 0;
  std::uint64_t packets = 0;
  std::uint64_t losses = 0;
  double plr = 0.0;
  ConfInterval ci;
  std::map<std::int64_t, std::uint64_t> latency_hist;  // delivered, mini-slots
  double mean_latency_ms = 0.0;
  double p99999_latency_ms = 0.0;  // +inf when the quantile falls in the miss mass
  double mean_sic_iters = 0.0;
  std::uint64_t attempts_transmitted = 0;
};

inline HybridEstimate hybrid_outage(const HybridConfig& cfg, const TimingConfig& timing,
                                    std::uint64_t n_frames, const RngPlan& plan, int workers = 1,
                                    double confidence = 0.95) {
  if (n_frames < 1) throw std::invalid_argument("n_frames must be >= 1");
  cfg.validate();

  struct Partial {
    std::uint64_t packets = 0;
    std::uint64_t losses = 0;
    std::uint64_t sic_iters = 0;
    std::uint64_t attempts = 0;
    std::map<std::int64_t, std::uint64_t> hist;
  };
  const auto total = parallel_accumulate<Partial>(
      n_frames, workers,
      [&](Partial& p, std::uint64_t frame) {
        Philox4x32 rng = plan.stream(frame);
        const auto fr = simulate_hybrid_frame(cfg, timing, rng);
        p.sic_iters += static_cast<std::uint64_t>(fr.sic_iterations);
        for (const auto& u : fr.users) {
          ++p.packets;
          p.attempts += static_cast<std::uint64_t>(u.attempts_transmitted);
          if (u.delivered)
            ++p.hist[u.latency_minislots];
          else
            ++p.losses;
        }
      },
      [](Partial& into, const Partial& from) {
        into.packets += from.packets;
        into.losses += from.losses;
        into.sic_iters += from.sic_iters;
        into.attempts += from.attempts;
        for (const auto& [k, v] : from.hist) into.hist[k] += v;
      });

  HybridEstimate est;
  est.frames = n_frames;
  est.packets = total.packets;
  est.losses = total.losses;
  est.plr = static_cast<double>(total.losses) / static_cast<double>(total.packets);
  est.ci = cp_interval(total.losses, total.packets, confidence);
  est.latency_hist = total.hist;
  est.mean_sic_iters = static_cast<double>(total.sic_iters) / static_cast<double>(n_frames);
  est.attempts_transmitted = total.attempts;

  const double ms = timing.minislot_ms();
  double weighted = 0.0;
  std::uint64_t delivered = 0;
  for (const auto& [slots, cnt] : total.hist) {
    weighted += static_cast<double>(slots) * static_cast<double>(cnt);
    delivered += cnt;
  }
  est.mean_latency_ms = delivered > 0 ? weighted / static_cast<double>(delivered) * ms : 0.0;

  // 99.999th percentile over all packets, misses counted as infinite latency.
  const auto rank = static_cast<std::uint64_t>(
      std::ceil(0.99999 * static_cast<double>(total.packets)));
  std::uint64_t seen = 0;
  est.p99999_latency_ms = std::numeric_limits<double>::infinity();
  for (const auto& [slots, cnt] : total.hist) {
    seen += cnt;
    if (seen >= rank) {
      est.p99999_latency_ms = static_cast<double>(slots) * ms;
      break;
    }
  }
  return est;
}

// FBL provisioning study: blocklengths large enough for the configured error
// targets at the sizing SNR (AWGN), compared against a single-shot baseline
// sized for the end-to-end target and a reactive baseline that retransmits
// dedicated-sized blocks on NACK.
struct SizingConfig {
  double snr_db = 5.0;
  double target_e2e = 1e-5;
  double shared_eps = 1e-4;  // sizing target for a pool resource
  int k_bits = 256;
};

struct EfficiencyReport {
  int n_single_shot = 0;
  int n_dedicated = 0;
  int n_shared = 0;
  double re_single_shot = 0.0;  // provisioned REs per cycle for all N users
  double re_hybrid = 0.0;
  double provisioned_re_per_user = 0.0;
  double ratio_vs_single_shot = 0.0;
  double re_reactive_expected = 0.0;
  double ratio_vs_reactive = 0.0;
  double delivered_fraction = 0.0;
  double bits_per_re = 0.0;
};

inline EfficiencyReport resource_efficiency(const HybridConfig& cfg, const SizingConfig& sizing,
                                            std::uint64_t n_frames, const RngPlan& plan,
                                            const TimingConfig& timing, int workers = 1) {
  const double s = db_to_linear(sizing.snr_db);
  const auto size_or_throw = [&](double eps, const char* what) {
    const auto r = required_blocklength(sizing.k_bits, eps, s);
    if (!r.feasible)
      throw EstimationError(std::string("infeasible FBL sizing for ") + what);
    return r.n_re;
  };
  EfficiencyReport rep;
  rep.n_single_shot = size_or_throw(sizing.target_e2e, "single-shot target");
  rep.n_dedicated = size_or_throw(cfg.initial_bler, "dedicated target");
  rep.n_shared = cfg.attempts > 1 ? size_or_throw(sizing.shared_eps, "shared target") : 0;

  const double n_users = cfg.n_users;
  rep.re_single_shot = n_users * rep.n_single_shot;
  rep.re_hybrid = n_users * rep.n_dedicated +
                  static_cast<double>(cfg.pool_size) * (cfg.attempts - 1) * rep.n_shared;
  rep.provisioned_re_per_user = rep.re_hybrid / n_users;
  rep.ratio_vs_single_shot = rep.re_hybrid / rep.re_single_shot;

  double retx_factor = 0.0;  // sum_{j=0}^{d-1} eps1^j
  double term = 1.0;
  for (int j = 0; j < cfg.attempts; ++j) {
    retx_factor += term;
    term *= cfg.initial_bler;
  }
  rep.re_reactive_expected = n_users * rep.n_dedicated * retx_factor;
  rep.ratio_vs_reactive = rep.re_hybrid / rep.re_reactive_expected;

  const auto mc = hybrid_outage(cfg, timing, n_frames, plan, workers);
  rep.delivered_fraction = 1.0 - mc.plr;
  rep.bits_per_re = rep.delivered_fraction * n_users * sizing.k_bits / rep.re_hybrid;
  return rep;
}

}  // namespace gfra
