#pragma once

// Recording -> ranked list of tunes by gross wavelet coherence against
// every cached fingerprint.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "reelprint/coherence.hpp"
#include "reelprint/synthesis.hpp"
#include "reelprint/timefreq.hpp"
#include "reelprint/tunebase.hpp"

namespace reelprint {

enum class IdentifyErrc { EmptySignal, ConfigMismatch, LengthMismatch, TooFewCandidates, InvalidArgument };
using IdentifyError = CodedError<IdentifyErrc>;

struct IdentifyConfig {
  GridConfig grid{200.0, 1200.0, 200, Spacing::Log};
  MorletParams morlet;
  double bpm = 100.0;
  double sample_rate = 8000.0;
  synth::Timbre timbre = synth::Timbre::Piano;  ///< of the fingerprints
  bool calibrate = true;
  bool restrict_to_coi = false;
  SmoothingConfig smoothing;
  std::size_t retain_top = 0;  ///< keep the coherence matrices of this many leaders
  TransformOptions transform;

  void validate() const;

  /// Fingerprint configuration this identification expects.
  FingerprintConfig fingerprint_config(std::uint64_t seed = 0, std::size_t setting = 1) const;

  /// Samples in a conforming recording: 128 slots at bpm and sample_rate.
  std::size_t recording_samples() const;
};

/// Mono mix, Fourier resampling to cfg.sample_rate, trim or zero-pad to
/// recording_samples(), peak-normalize.
Signal prepare_recording(const Signal& signal, const IdentifyConfig& cfg);
Signal prepare_recording(const AudioBuffer& audio, const IdentifyConfig& cfg);

struct Match {
  int tune_id = 0;
  std::string name;
  double gross = 0.0;
  double calibrated = 0.0;  ///< gross - min(gross); equals gross when calibration is off
};

struct RankedMatches {
  std::vector<Match> matches;  ///< gross descending, ties by tune_id
  std::vector<std::pair<int, CoherenceResult>> retained;

  std::size_t size() const { return matches.size(); }
  bool empty() const { return matches.empty(); }
};

/// `recording` must already conform (see prepare_recording) and is
/// peak-normalized before scoring, so the ranking ignores input gain. The
/// cache must have been built under cfg.fingerprint_config() up to seed and
/// setting.
RankedMatches identify(const Signal& recording, FingerprintCache& cache, const IdentifyConfig& cfg);

/// Same, for a recording whose scalogram is already computed.
RankedMatches identify(const Scalogram<double>& recording, FingerprintCache& cache, const IdentifyConfig& cfg);

/// (top - second) / (top - min) over gross scores; 0 when all are equal.
double decisiveness(const RankedMatches& matches);

}  // namespace reelprint
