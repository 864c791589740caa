#include "reelprint/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "reelprint/fourier.hpp"

namespace reelprint::synth {

namespace {

std::size_t sample_count(double sample_rate, double duration) {
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(sample_rate * duration)));
}

// Truncation toward zero, then at least one sample.
std::size_t phase_samples(double sample_rate, double seconds) {
  return static_cast<std::size_t>(std::max<long long>(1, static_cast<long long>(sample_rate * seconds)));
}

void append_ramp(std::vector<double>& out, double from, double to, std::size_t n) {
  if (n == 1) {
    out.push_back(from);
    return;
  }
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1));
}

void normalize_peak(Eigen::VectorXd& wave) {
  const double peak = wave.size() ? wave.cwiseAbs().maxCoeff() : 0.0;
  if (peak > 0.0) wave /= peak;
}

}  // namespace

double semitone_to_freq(double semitones) { return kMiddleC * std::exp2(semitones / 12.0); }

Eigen::VectorXd adsr_envelope(const AdsrParams& p, double sample_rate, double duration) {
  if (!(duration > 0.0) || !(sample_rate > 0.0))
    throw SynthError(SynthErrc::InvalidArgument, "envelope needs positive duration and sample rate");
  const std::size_t total = sample_count(sample_rate, duration);
  const std::size_t attack = phase_samples(sample_rate, p.attack);
  const std::size_t decay = phase_samples(sample_rate, p.decay);
  const std::size_t release = phase_samples(sample_rate, p.release);
  const auto rest = static_cast<long long>(total) - static_cast<long long>(attack + decay + release);
  const std::size_t sustain = static_cast<std::size_t>(std::max<long long>(1, rest));

  std::vector<double> env;
  env.reserve(attack + decay + sustain + release);
  append_ramp(env, 0.0, 1.0, attack);
  append_ramp(env, 1.0, p.sustain_level, decay);
  env.insert(env.end(), sustain, p.sustain_level);
  append_ramp(env, p.sustain_level, 0.0, release);
  env.resize(total);
  return Eigen::Map<const Eigen::VectorXd>(env.data(), static_cast<Eigen::Index>(total));
}

AdsrParams fit_adsr_to_note(const AdsrParams& ratios, double duration) {
  const double share = ratios.decay + ratios.sustain + ratios.release;
  const double remaining = duration - ratios.attack;
  AdsrParams fitted = ratios;
  fitted.decay = remaining * ratios.decay / share;
  fitted.sustain = remaining * ratios.sustain / share;
  fitted.release = remaining * ratios.release / share;
  return fitted;
}

std::string_view timbre_name(Timbre t) {
  switch (t) {
    case Timbre::Sine: return "sine";
    case Timbre::Piano: return "piano";
    case Timbre::Banjo: return "banjo";
  }
  return "sine";
}

Timbre parse_timbre(std::string_view name) {
  if (name == "sine") return Timbre::Sine;
  if (name == "piano") return Timbre::Piano;
  if (name == "banjo") return Timbre::Banjo;
  throw SynthError(SynthErrc::InvalidArgument, "unknown timbre '" + std::string(name) + "'");
}

TimbreProfile timbre_profile(Timbre t) {
  TimbreProfile p;
  switch (t) {
    case Timbre::Sine:
      break;
    case Timbre::Piano:
      // 2nd..4th harmonics at roughly -4, -8 and -14 dB.
      p.harmonic_weights = {0.6, 0.4, 0.2};
      p.cubic_nonlinearity = 0.05;
      p.noise_amplitude = 0.001;
      break;
    case Timbre::Banjo:
      p.harmonic_weights = {0.7, 0.5, 0.3, 0.2, 0.1};
      p.detune = {{1.01, 0.1}, {0.99, 0.08}};
      p.cubic_nonlinearity = 0.2;
      p.adsr = {0.003, 0.08, 0.02, 0.1, 0.2};
      break;
  }
  return p;
}

Eigen::VectorXd render_note(double freq, double duration, double sample_rate, const TimbreProfile& profile,
                            std::mt19937_64& rng) {
  if (!(freq > 0.0) || !(duration > 0.0) || !(sample_rate > 0.0))
    throw SynthError(SynthErrc::InvalidArgument, "note needs positive frequency, duration and sample rate");
  const std::size_t n = sample_count(sample_rate, duration);
  const double two_pi_f = 2.0 * std::numbers::pi * freq;

  Eigen::VectorXd wave(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * duration / static_cast<double>(n);
    double v = std::sin(two_pi_f * t);
    for (std::size_t h = 0; h < profile.harmonic_weights.size(); ++h)
      v += profile.harmonic_weights[h] * std::sin(two_pi_f * static_cast<double>(h + 2) * t);
    for (const auto& [ratio, weight] : profile.detune) v += weight * std::sin(two_pi_f * ratio * t);
    wave[static_cast<Eigen::Index>(i)] = v;
  }
  if (profile.cubic_nonlinearity != 0.0)
    wave += profile.cubic_nonlinearity * wave.array().cube().matrix();
  if (profile.envelope)
    wave = wave.cwiseProduct(adsr_envelope(fit_adsr_to_note(profile.adsr, duration), sample_rate, duration));
  if (profile.noise_amplitude != 0.0) {
    std::normal_distribution<double> noise(-1.0, 1.0);
    for (auto& v : wave) v += profile.noise_amplitude * noise(rng);
  }
  normalize_peak(wave);
  return wave;
}

Signal render_note(double freq, double duration, double sample_rate, Timbre timbre, std::mt19937_64& rng) {
  return {render_note(freq, duration, sample_rate, timbre_profile(timbre), rng), sample_rate};
}

double slot_seconds(double bpm) {
  if (!(bpm > 0.0)) throw SynthError(SynthErrc::InvalidArgument, "bpm must be positive");
  return 60.0 / bpm / 4.0;
}

std::size_t slot_samples(double bpm, double sample_rate) { return sample_count(sample_rate, slot_seconds(bpm)); }

Signal render_tune(const abc::SemitoneSequence& seq, const TimbreProfile& profile, double bpm, double sample_rate,
                   std::mt19937_64& rng) {
  const std::size_t per_slot = slot_samples(bpm, sample_rate);
  const double note_seconds = static_cast<double>(per_slot) / sample_rate;
  Signal out;
  out.sample_rate = sample_rate;
  out.samples = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(per_slot * seq.values.size()));
  for (std::size_t i = 0; i < seq.values.size(); ++i) {
    if (!seq.values[i]) continue;
    out.samples.segment(static_cast<Eigen::Index>(i * per_slot), static_cast<Eigen::Index>(per_slot)) =
        render_note(semitone_to_freq(*seq.values[i]), note_seconds, sample_rate, profile, rng);
  }
  return out;
}

Signal render_tune(const abc::SemitoneSequence& seq, Timbre timbre, double bpm, double sample_rate,
                   std::mt19937_64& rng) {
  return render_tune(seq, timbre_profile(timbre), bpm, sample_rate, rng);
}

Signal control_signal(ControlKind kind, double duration, double sample_rate, double f_lo, double f_hi,
                      std::mt19937_64& rng) {
  if (!(duration > 0.0) || !(sample_rate > 0.0))
    throw SynthError(SynthErrc::InvalidArgument, "control signal needs positive duration and sample rate");
  const std::size_t n = sample_count(sample_rate, duration);
  Signal out{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), sample_rate};
  if (kind == ControlKind::Blank) return out;

  if (!(f_lo > 0.0) || !(f_lo < f_hi) || f_hi > sample_rate / 2.0)
    throw SynthError(SynthErrc::InvalidBand, "noise band must satisfy 0 < f_lo < f_hi <= sample_rate / 2");
  const std::size_t padded = next_pow2(n);
  const double bin_hz = sample_rate / static_cast<double>(padded);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  ComplexVector<double> spectrum = ComplexVector<double>::Zero(static_cast<Eigen::Index>(padded));
  for (std::size_t k = 1; k <= padded / 2; ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    if (f < f_lo || f > f_hi) continue;
    const double phi = phase(rng);
    if (k == padded / 2) {
      spectrum[static_cast<Eigen::Index>(k)] = std::cos(phi);
    } else {
      spectrum[static_cast<Eigen::Index>(k)] = std::polar(1.0, phi);
      spectrum[static_cast<Eigen::Index>(padded - k)] = std::polar(1.0, -phi);
    }
  }
  out.samples = ifft(spectrum).head(static_cast<Eigen::Index>(n)).real();
  normalize_peak(out.samples);
  return out;
}

}  // namespace reelprint::synth
