#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "gfra/fbl.hpp"
#include "gfra/phy.hpp"
#include "gfra/rng.hpp"
#include "gfra/timing.hpp"

namespace gfra {

// Feedback-driven retransmission on NACK.
struct Reactive {};

// K blind repetitions in consecutive mini-slots, no feedback in between.
struct KRepetition {
  int k = 2;
};

// Consecutive repetitions with per-attempt feedback; the chain stops once an
// ACK has reached the UE.
struct Proactive {
  int max_tx = 8;
};

// Reactive with the power-control boost sequence applied per attempt.
struct ReactiveBoost {};

// Reactive schedule shifted by the grant acquisition procedure.
struct GrantBased {
  int scheduling_delay_minislots = 7;
};

using HarqScheme = std::variant<Reactive, KRepetition, Proactive, ReactiveBoost, GrantBased>;

inline const char* scheme_name(const HarqScheme& s) {
  struct V {
    const char* operator()(const Reactive&) const { return "reactive"; }
    const char* operator()(const KRepetition&) const { return "krep"; }
    const char* operator()(const Proactive&) const { return "proactive"; }
    const char* operator()(const ReactiveBoost&) const { return "reactive_boost"; }
    const char* operator()(const GrantBased&) const { return "grant_based"; }
  };
  return std::visit(V{}, s);
}

enum class Combining { none, chase };

// Per-attempt success taken from a fixed probability vector (the last entry
// holds for attempts beyond it).
struct FixedAttemptModel {
  std::vector<double> success_probs = {0.9};
};

// Per-attempt error probability from the finite-blocklength law at the link's
// SNR, with the boost sequence applied relative to the first attempt's power
// (so P_max clipping shows up as a saturating boost).
struct FblAttemptModel {
  FblCodeSpec code;
  LinkBudget link;
  PowerControlConfig power;
  Combining combining = Combining::chase;
  double pl_db = 0.0;
  int m_rb = 1;
};

using AttemptModel = std::variant<FixedAttemptModel, FblAttemptModel>;

// Chase combining is maximum-ratio combining of identical copies: SINRs add.
inline double chase_combined_eps(std::span<const double> attempt_sinrs, const FblCodeSpec& spec) {
  if (attempt_sinrs.empty()) throw std::domain_error("chase_combined_eps requires >= 1 attempt");
  double total = 0.0;
  for (double s : attempt_sinrs) total += s;
  return per_normal_approx(spec, total);
}

struct AttemptSlot {
  std::int64_t start = 0;           // mini-slot index of the transmission
  std::int64_t feedback_ready = 0;  // instant the feedback reaches the UE
};

// Attempt start times and feedback arrival instants in mini-slots. Every
// transmission occupies one mini-slot; feedback for an attempt ending at t is
// available at t + bs_proc + feedback. Reactive schemes space attempts by the
// full HARQ RTT (tx + bs_proc + feedback + ue_proc); repetition schemes use
// consecutive mini-slots.
inline std::vector<AttemptSlot> attempt_schedule(const HarqScheme& scheme,
                                                 const TimingConfig& timing, int max_attempts) {
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  const std::int64_t fb_lag = 1 + timing.bs_proc_minislots + timing.feedback_minislots;
  std::vector<AttemptSlot> out;

  const auto consecutive = [&](int count) {
    for (int j = 0; j < count; ++j)
      out.push_back({j, j + fb_lag});
  };
  const auto reactive_like = [&](std::int64_t shift) {
    const std::int64_t rtt = timing.harq_rtt_minislots();
    for (int j = 0; j < max_attempts; ++j)
      out.push_back({shift + j * rtt, shift + j * rtt + fb_lag});
  };

  if (std::holds_alternative<Reactive>(scheme) || std::holds_alternative<ReactiveBoost>(scheme)) {
    reactive_like(0);
  } else if (const auto* kr = std::get_if<KRepetition>(&scheme)) {
    consecutive(std::min(kr->k, max_attempts));
  } else if (const auto* pr = std::get_if<Proactive>(&scheme)) {
    consecutive(std::min(pr->max_tx, max_attempts));
  } else {
    reactive_like(std::get<GrantBased>(scheme).scheduling_delay_minislots);
  }
  return out;
}

struct HarqRunResult {
  std::vector<double> latencies_ms;  // delivered packets only
  std::uint64_t misses = 0;
  std::uint64_t packets = 0;
  std::uint64_t attempts_transmitted = 0;  // resource usage incl. cancelled-too-late repetitions
};

namespace detail {

// Error probability of attempt j (1-based) under the model; `sinr_acc`
// carries the running SINR sum for chase combining, `gain` the block-fading
// draw for this attempt.
inline double attempt_eps(const AttemptModel& model, int attempt_j, double gain,
                          double& sinr_acc) {
  if (const auto* fixed = std::get_if<FixedAttemptModel>(&model)) {
    const auto& p = fixed->success_probs;
    if (p.empty()) throw std::invalid_argument("success_probs must not be empty");
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(attempt_j - 1), p.size() - 1);
    return 1.0 - p[i];
  }
  const auto& fbl = std::get<FblAttemptModel>(model);
  const double boost_db = tx_power_dbm(fbl.power, fbl.m_rb, fbl.pl_db, attempt_j) -
                          tx_power_dbm(fbl.power, fbl.m_rb, fbl.pl_db, 1);
  const double snr = db_to_linear(fbl.link.avg_snr_db + boost_db) * gain;
  if (fbl.combining == Combining::chase) {
    sinr_acc += snr;
    return per_normal_approx(fbl.code, sinr_acc);
  }
  return per_normal_approx(fbl.code, snr);
}

inline bool model_uses_fading(const AttemptModel& model) {
  const auto* fbl = std::get_if<FblAttemptModel>(&model);
  return fbl != nullptr && fbl->link.fading == Fading::rayleigh_block;
}

}  // namespace detail

// One packet per replication index. A single uniform U couples all attempts
// of a packet (attempt j succeeds iff eps_j <= 1 - U), so combining gains are
// monotone: extra soft information can only help. Latency runs from packet
// arrival to the end of BS processing of the first successful attempt.
// For Proactive, only repetitions starting strictly after the ACK arrival are
// cancelled; everything started up to that instant counts as transmitted.
inline HarqRunResult simulate_harq(const HarqScheme& scheme, const AttemptModel& model,
                                   const TimingConfig& timing, std::uint64_t n_packets,
                                   double deadline_ms, const RngPlan& plan,
                                   int max_attempts = 8) {
  if (n_packets < 1) throw std::invalid_argument("n_packets must be >= 1");
  const auto schedule = attempt_schedule(scheme, timing, max_attempts);
  const double ms_per_slot = timing.minislot_ms();
  const bool fading = detail::model_uses_fading(model);
  const bool proactive = std::holds_alternative<Proactive>(scheme);

  HarqRunResult res;
  res.packets = n_packets;
  res.latencies_ms.reserve(n_packets);

  for (std::uint64_t pkt = 0; pkt < n_packets; ++pkt) {
    Philox4x32 rng = plan.stream(pkt);
    const double align_wait =
        timing.alignment == Alignment::next_boundary ? uniform01(rng) : 0.0;
    const double u = uniform01(rng);

    double sinr_acc = 0.0;
    int success_attempt = -1;  // index into schedule
    for (std::size_t j = 0; j < schedule.size(); ++j) {
      const double gain = fading ? exp_unit(rng) : 1.0;
      const double eps = detail::attempt_eps(model, static_cast<int>(j) + 1, gain, sinr_acc);
      if (eps <= 1.0 - u) {
        success_attempt = static_cast<int>(j);
        break;
      }
    }

    std::uint64_t transmitted = schedule.size();
    if (success_attempt >= 0) {
      if (proactive) {
        const std::int64_t ack_at = schedule[success_attempt].feedback_ready;
        transmitted = 0;
        for (const auto& a : schedule)
          if (a.start <= ack_at) ++transmitted;
      } else if (!std::holds_alternative<KRepetition>(scheme)) {
        transmitted = static_cast<std::uint64_t>(success_attempt) + 1;
      }
      const std::int64_t done =
          schedule[success_attempt].start + 1 + timing.bs_proc_minislots;
      const double latency_ms = (align_wait + static_cast<double>(done)) * ms_per_slot;
      if (deadline_ms > 0.0 && latency_ms > deadline_ms) {
        ++res.misses;
      } else {
        res.latencies_ms.push_back(latency_ms);
      }
    } else {
      ++res.misses;
    }
    res.attempts_transmitted += transmitted;
  }
  return res;
}

}  // namespace gfra
