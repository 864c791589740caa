#include "reelprint/identify.hpp"

#include <algorithm>

#include "reelprint/fourier.hpp"
#include "reelprint/parallel.hpp"

namespace reelprint {

void IdentifyConfig::validate() const {
  if (!(sample_rate > 0.0) || !(bpm > 0.0))
    throw IdentifyError(IdentifyErrc::InvalidArgument, "sample rate and bpm must be positive");
  if (grid.f_max > sample_rate / 2.0)
    throw IdentifyError(IdentifyErrc::InvalidArgument, "f_max exceeds the Nyquist frequency");
  morlet.validate();
  smoothing.validate();
}

FingerprintConfig IdentifyConfig::fingerprint_config(std::uint64_t seed, std::size_t setting) const {
  FingerprintConfig fc;
  fc.render = {timbre, bpm, sample_rate, seed, setting};
  fc.grid = grid;
  fc.morlet = morlet;
  return fc;
}

std::size_t IdentifyConfig::recording_samples() const {
  return abc::kGridSlots * synth::slot_samples(bpm, sample_rate);
}

Signal prepare_recording(const Signal& signal, const IdentifyConfig& cfg) {
  if (signal.samples.size() == 0 || !(signal.sample_rate > 0.0))
    throw IdentifyError(IdentifyErrc::EmptySignal, "recording is empty");
  Signal out;
  out.sample_rate = cfg.sample_rate;
  out.samples = signal.sample_rate == cfg.sample_rate
                    ? signal.samples
                    : resample_fourier(signal.samples, signal.sample_rate, cfg.sample_rate);
  const auto target = static_cast<Eigen::Index>(cfg.recording_samples());
  const Eigen::Index keep = std::min(target, out.samples.size());
  Eigen::VectorXd fitted = Eigen::VectorXd::Zero(target);
  fitted.head(keep) = out.samples.head(keep);
  out.samples = std::move(fitted);
  const double peak = out.samples.cwiseAbs().maxCoeff();
  if (peak > 0.0) out.samples /= peak;
  return out;
}

Signal prepare_recording(const AudioBuffer& audio, const IdentifyConfig& cfg) {
  if (audio.frames() == 0 || audio.channel_count() == 0)
    throw IdentifyError(IdentifyErrc::EmptySignal, "recording is empty");
  return prepare_recording(audio.to_mono(), cfg);
}

namespace {

void check_cache(const FingerprintCache& cache, const IdentifyConfig& cfg) {
  const FingerprintConfig& have = cache.config();
  const FingerprintConfig want = cfg.fingerprint_config(have.render.seed, have.render.setting);
  if (!(have == want))
    throw IdentifyError(IdentifyErrc::ConfigMismatch, "fingerprints were built under a different configuration");
}

}  // namespace

RankedMatches identify(const Signal& recording, FingerprintCache& cache, const IdentifyConfig& cfg) {
  cfg.validate();
  check_cache(cache, cfg);
  if (recording.sample_rate != cfg.sample_rate)
    throw IdentifyError(IdentifyErrc::ConfigMismatch, "recording sample rate differs from the configuration");
  // The coherence denominator floor is absolute, so scores depend on input
  // level unless it is fixed here. Fingerprints are peak-normalized too.
  Signal level = recording;
  const double peak = level.samples.cwiseAbs().maxCoeff();
  if (peak > 0.0) level.samples /= peak;
  const ScaleGrid grid = make_scale_grid(cfg.grid, cfg.sample_rate, cfg.morlet);
  return identify(cwt_fft<double>(level, grid, cfg.morlet, cfg.transform), cache, cfg);
}

RankedMatches identify(const Scalogram<double>& recording, FingerprintCache& cache, const IdentifyConfig& cfg) {
  cfg.validate();
  check_cache(cache, cfg);
  if (!(recording.grid == make_scale_grid(cfg.grid, cfg.sample_rate, cfg.morlet)))
    throw IdentifyError(IdentifyErrc::ConfigMismatch, "recording scalogram uses a different grid");
  for (const auto& fp : cache.entries())
    if (fp.scalogram.timesteps() != recording.timesteps())
      throw IdentifyError(IdentifyErrc::LengthMismatch, "recording and fingerprint lengths differ");

  cache.prepare_scoring(cfg.smoothing, cfg.transform);
  const RealMatrix power = smoothed_power(recording.coefficients, cfg.smoothing);
  const BoolMatrix inside = cfg.restrict_to_coi ? coi_mask(recording.coi, recording.grid) : BoolMatrix();

  const auto& entries = cache.entries();
  std::vector<double> gross(entries.size());
  parallel_for(entries.size(), cfg.transform.threads, [&](std::size_t i) {
    const RealMatrix c = coherence_matrix(recording.coefficients, entries[i].scalogram.coefficients, power,
                                          entries[i].smoothed_power, cfg.smoothing);
    gross[i] = cfg.restrict_to_coi ? inside.select(c, 0.0).sum() : c.sum();
  });

  RankedMatches out;
  out.matches.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    out.matches.push_back({entries[i].tune_id, entries[i].name, gross[i], gross[i]});
  std::sort(out.matches.begin(), out.matches.end(), [](const Match& a, const Match& b) {
    return a.gross != b.gross ? a.gross > b.gross : a.tune_id < b.tune_id;
  });
  if (cfg.calibrate && !out.matches.empty()) {
    const double lowest = out.matches.back().gross;
    for (auto& m : out.matches) m.calibrated = m.gross - lowest;
  }

  const std::size_t keep = std::min(cfg.retain_top, out.matches.size());
  for (std::size_t r = 0; r < keep; ++r) {
    const Fingerprint* fp = cache.find(out.matches[r].tune_id);
    CoherenceResult res;
    res.coherence = coherence_matrix(recording.coefficients, fp->scalogram.coefficients, power, fp->smoothed_power,
                                     cfg.smoothing);
    res.phase = phase_of(recording.coefficients.cwiseProduct(fp->scalogram.coefficients.conjugate()));
    res.grid = recording.grid;
    res.coi = recording.coi;
    out.retained.emplace_back(out.matches[r].tune_id, std::move(res));
  }
  return out;
}

double decisiveness(const RankedMatches& matches) {
  if (matches.size() < 2) throw IdentifyError(IdentifyErrc::TooFewCandidates, "decisiveness needs two candidates");
  double top = matches.matches.front().gross, low = top;
  for (const auto& m : matches.matches) {
    top = std::max(top, m.gross);
    low = std::min(low, m.gross);
  }
  double second = low;
  bool skipped_top = false;
  for (const auto& m : matches.matches) {
    if (!skipped_top && m.gross == top) {
      skipped_top = true;
      continue;
    }
    second = std::max(second, m.gross);
  }
  const double range = top - low;
  return range > 0.0 ? (top - second) / range : 0.0;
}

}  // namespace reelprint
