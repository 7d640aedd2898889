#pragma once

#include <stdexcept>
#include <string>

namespace gfra {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Alignment { immediate, next_boundary };

// Duration of a mini-slot of `symbols` OFDM symbols at subcarrier spacing
// `scs_khz`, normal cyclic prefix: 14 symbols per 1 ms reference slot at
// 15 kHz, scaling inversely with SCS. symbols may go up to 14 (a full slot);
// TimingConfig restricts its own field to the NR mini-slot range 1..13.
inline double minislot_duration_ms(int scs_khz, int symbols) {
  if (scs_khz != 15 && scs_khz != 30 && scs_khz != 60 && scs_khz != 120 && scs_khz != 240)
    throw ConfigError("scs_khz must be one of 15/30/60/120/240, got " + std::to_string(scs_khz));
  if (symbols < 1 || symbols > 14)
    throw ConfigError("symbols must be in 1..14, got " + std::to_string(symbols));
  return static_cast<double>(symbols) / (14.0 * (static_cast<double>(scs_khz) / 15.0));
}

struct TimingConfig {
  int scs_khz = 15;
  int symbols_per_minislot = 2;
  int ue_proc_minislots = 1;
  int bs_proc_minislots = 1;
  int feedback_minislots = 1;
  Alignment alignment = Alignment::immediate;

  void validate() const {
    minislot_duration_ms(scs_khz, symbols_per_minislot);
    if (symbols_per_minislot > 13)
      throw ConfigError("symbols_per_minislot must be in 1..13, got " +
                        std::to_string(symbols_per_minislot));
    if (ue_proc_minislots < 0 || bs_proc_minislots < 0 || feedback_minislots < 0)
      throw ConfigError("processing/feedback mini-slot counts must be non-negative");
  }

  double minislot_ms() const { return minislot_duration_ms(scs_khz, symbols_per_minislot); }

  // Transmission end to the next transmission start for feedback-driven
  // schemes: one mini-slot each for BS processing and the feedback, plus the
  // UE-side turnaround.
  int harq_rtt_minislots() const {
    return 1 + bs_proc_minislots + feedback_minislots + ue_proc_minislots;
  }
};

}  // namespace gfra
