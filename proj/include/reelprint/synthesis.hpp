#pragma once

// Additive note synthesis with ADSR envelopes, tune rendering on the
// 128-slot grid, and control signals for bias probing.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reelprint/abc.hpp"
#include "reelprint/core.hpp"

namespace reelprint::synth {

enum class SynthErrc { InvalidBand, InvalidArgument };
using SynthError = CodedError<SynthErrc>;

/// Reference pitch of semitone 0: equal-tempered middle C for A4 = 440 Hz,
/// 440 * 2^(-9/12), i.e. 261.63 Hz to two decimals.
inline constexpr double kMiddleC = 261.6255653005986;

/// kMiddleC * 2^(n / 12)
double semitone_to_freq(double semitones);

/// Attack is absolute; the other three are either absolute seconds (as
/// passed to adsr_envelope) or ratios, see AdsrProfile.
struct AdsrParams {
  double attack = 0.01;
  double decay = 0.2;
  double sustain = 0.2;
  double release = 0.7;
  double sustain_level = 0.7;
};

/// Piecewise-linear envelope: 0 -> 1 over the attack, 1 -> sustain_level
/// over the decay, flat sustain, sustain_level -> 0 over the release. Every
/// phase spans at least one sample; output has round(sample_rate * duration)
/// samples.
Eigen::VectorXd adsr_envelope(const AdsrParams& params, double sample_rate, double duration);

/// Rescales (attack, decay, sustain, release) for a note: attack stays
/// absolute, the other three share duration - attack in proportion.
AdsrParams fit_adsr_to_note(const AdsrParams& ratios, double duration);

enum class Timbre { Sine, Piano, Banjo };

std::string_view timbre_name(Timbre t);
Timbre parse_timbre(std::string_view name);

/// Everything that distinguishes one instrument model from another.
struct TimbreProfile {
  std::vector<double> harmonic_weights;                  ///< for harmonics 2, 3, ...
  std::vector<std::pair<double, double>> detune;         ///< (frequency ratio, weight)
  double cubic_nonlinearity = 0.0;                       ///< wave += c * wave^3
  double noise_amplitude = 0.0;                          ///< times N(-1, 1) per sample
  AdsrParams adsr;                                       ///< ratios, see fit_adsr_to_note
  bool envelope = true;
};

TimbreProfile timbre_profile(Timbre t);

/// Renders round(sample_rate * duration) samples of one note, peak-normalized
/// to 1. `rng` is only consumed when the profile has noise.
Eigen::VectorXd render_note(double freq, double duration, double sample_rate, const TimbreProfile& profile,
                            std::mt19937_64& rng);

Signal render_note(double freq, double duration, double sample_rate, Timbre timbre, std::mt19937_64& rng);

/// Duration of one grid slot: a sixteenth of a bar of four beats, (60/bpm)/4.
double slot_seconds(double bpm);

/// Samples per rendered slot.
std::size_t slot_samples(double bpm, double sample_rate);

/// Renders each slot for slot_seconds(bpm) and concatenates; rests are silent.
Signal render_tune(const abc::SemitoneSequence& seq, const TimbreProfile& profile, double bpm, double sample_rate,
                   std::mt19937_64& rng);

Signal render_tune(const abc::SemitoneSequence& seq, Timbre timbre, double bpm, double sample_rate,
                   std::mt19937_64& rng);

enum class ControlKind { Blank, WhiteNoise };

/// Blank (all zeros) or band-limited white noise synthesized in the
/// frequency domain: flat magnitude with uniform random phase inside
/// [f_lo, f_hi], zero elsewhere, peak-normalized.
Signal control_signal(ControlKind kind, double duration, double sample_rate, double f_lo, double f_hi,
                      std::mt19937_64& rng);

}  // namespace reelprint::synth
