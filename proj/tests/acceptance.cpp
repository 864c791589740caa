// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "reelprint/abc.hpp"
#include "reelprint/coherence.hpp"
#include "reelprint/fourier.hpp"
#include "reelprint/identify.hpp"
#include "reelprint/synthesis.hpp"
#include "reelprint/timefreq.hpp"
#include "reelprint/tunebase.hpp"
#include "support.hpp"

using namespace reelprint;

namespace {

// Criterion 1
constexpr double kPitchTol = 1e-6;
// Criterion 3
constexpr double kTransformTol = 1e-6;
// Criterion 4
constexpr double kRoundTripTol = 1e-9;
constexpr double kParsevalTol = 1e-9;
// Criterion 5
constexpr double kSelfCoherenceTol = 1e-6;
// Criterion 6
constexpr double kPhaseTol = 0.1;
// Criterion 7
constexpr double kSnrDb = 20.0;
constexpr int kRequiredTop1 = 10;
constexpr int kRequiredDirectional = 8;
// Criterion 8: (max - min) / mean of the uncalibrated band-noise control
// scores. Measured at 0.0932 on the fixture base; committed with headroom
// as a regression bound.
constexpr double kControlSpreadBound = 0.10;
// Criterion 9
constexpr double kNaiveRatioMin = 3.0;
constexpr double kFftRatioMax = 2.8;
constexpr double kPaddingStepTol = 0.25;
// Criterion 10
constexpr int kCalibrationTrials = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string read_text(const std::string& name) {
  std::ifstream in(testing::data_path(name));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const TuneBase& desk_base() {
  static const TuneBase base = load_tunebase(testing::data_path("desk_tunebase.json"));
  return base;
}

Outcome pitch_formula() {
  double worst = std::abs(synth::semitone_to_freq(9) - 440.0);
  const bool a440 = worst < kPitchTol;
  double octave = 0.0;
  for (int n = -24; n <= 36; ++n)
    octave = std::max(octave, std::abs(synth::semitone_to_freq(n + 12) / synth::semitone_to_freq(n) - 2.0));
  return {a440 && octave < 1e-12, fmt("|f(9) - 440| = %.2e, max octave ratio error %.2e", worst, octave)};
}

Outcome pipeline_dimensions() {
  const abc::TuneScore score = abc::parse_abc(read_text("galway_rambler.abc"));
  const abc::NoteGrid grid = abc::normalize_to_grid(score);
  std::size_t filled = 0;
  for (const auto& s : grid.slots) filled += s.has_value();
  std::string first_bar;
  for (std::size_t i = 0; i < 8; ++i) first_bar += grid.slots[i] ? std::string(1, grid.slots[i]->letter) : "z";
  std::mt19937_64 rng(0);
  const Signal s = synth::render_tune(abc::encode_semitones(grid, score.key), synth::Timbre::Piano, 100.0, 8000.0, rng);
  const bool ok = grid.slots.size() == 128 && filled == 128 && s.size() == 153600 &&
                  std::abs(s.duration() - 19.2) < 1e-12 && first_bar == "GGdGeGdG";
  return {ok, fmt("%zu slots, %zu samples, %.2f s, first bar %s", grid.slots.size(), s.size(), s.duration(),
                  first_bar.c_str())};
}

Outcome transform_equivalence() {
  const Signal x = testing::random_signal(1024, 1234);
  const ScaleGrid g = make_scale_grid(200.0, 4000.0, 32, 8000.0);
  const Scalogram<double> naive = cwt_naive(x, g), fast = cwt_fft(x, g);
  const Eigen::Index edge = 2 * detail::naive_half_width(g.scales.maxCoeff());
  const Eigen::Index width = 1024 - 2 * edge;
  const double rel = testing::relative_frobenius(fast.coefficients.middleCols(edge, width),
                                                 naive.coefficients.middleCols(edge, width));

  const Signal y = testing::random_signal(256, 99);
  const ScaleGrid g3 = make_scale_grid(1000.0, 3000.0, 3, 8000.0);
  const Scalogram<double> n3 = cwt_naive(y, g3), f3 = cwt_fft(y, g3);
  double worst_naive = 0.0, worst_fft = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) {
    const Eigen::Index margin = detail::naive_half_width(g3.scales[i]);
    double en = 0.0, ef = 0.0, norm = 0.0, inner = 0.0;
    for (Eigen::Index b = 0; b < 256; ++b) {
      const std::complex<double> ref = testing::direct_cwt(y, g3.scales[i], b, 5.0);
      norm += std::norm(ref);
      en += std::norm(n3.coefficients(i, b) - ref);
      if (b >= margin && b < 256 - margin) {
        ef += std::norm(f3.coefficients(i, b) - ref);
        inner += std::norm(ref);
      }
    }
    worst_naive = std::max(worst_naive, std::sqrt(en / norm));
    worst_fft = std::max(worst_fft, std::sqrt(ef / inner));
  }
  return {rel < kTransformTol && worst_naive < kTransformTol && worst_fft < kTransformTol,
          fmt("fft vs naive %.2e (%ld interior columns); oracle: naive %.2e, fft %.2e", rel, static_cast<long>(width),
              worst_naive, worst_fft)};
}

Outcome fft_correctness() {
  const Eigen::VectorXd x = testing::random_signal(65536, 4).samples;
  const Spectrum<double> s = fft(x);
  const double round_trip = (ifft(s).real() - x).cwiseAbs().maxCoeff();
  const double parseval =
      std::abs(s.coefficients.squaredNorm() / static_cast<double>(s.size()) - x.squaredNorm()) / x.squaredNorm();

  Eigen::VectorXd tones = Eigen::VectorXd::Zero(1000);
  const std::vector<double> freqs{24.0, 40.0, 60.0, 80.0};
  for (Eigen::Index n = 0; n < 1000; ++n)
    for (double f : freqs) tones[n] += std::sin(2.0 * std::numbers::pi * f * static_cast<double>(n) / 1000.0);
  const Spectrum<double> t = fft(tones, 1000.0);
  const Eigen::VectorXd mag = t.coefficients.head(static_cast<Eigen::Index>(t.size() / 2)).cwiseAbs();
  std::vector<std::pair<double, Eigen::Index>> peaks;
  for (Eigen::Index k = 1; k + 1 < mag.size(); ++k)
    if (mag[k] > mag[k - 1] && mag[k] >= mag[k + 1]) peaks.emplace_back(mag[k], k);
  std::sort(peaks.rbegin(), peaks.rend());
  std::vector<Eigen::Index> top;
  for (std::size_t i = 0; i < 4 && i < peaks.size(); ++i) top.push_back(peaks[i].second);
  std::sort(top.begin(), top.end());
  bool peaks_ok = top.size() == 4;
  std::string found;
  for (std::size_t i = 0; i < top.size(); ++i) {
    peaks_ok = peaks_ok && top[i] == std::lround(freqs[i] / t.bin_hz);
    found += fmt("%s%.1f", i ? "/" : "", static_cast<double>(top[i]) * t.bin_hz);
  }
  return {round_trip < kRoundTripTol && parseval < kParsevalTol && peaks_ok,
          fmt("round trip %.2e, Parseval %.2e, peaks at %s Hz", round_trip, parseval, found.c_str())};
}

Outcome self_coherence() {
  const GridConfig grid{200.0, 1200.0, 64};
  const std::size_t n = 16384;
  RenderConfig piano;
  Signal tune = render_setting(*desk_base().resolve("The Galway Rambler").record, piano);
  tune.samples.conservativeResize(static_cast<Eigen::Index>(n));
  std::mt19937_64 rng(8);
  const Signal noise =
      synth::control_signal(synth::ControlKind::WhiteNoise, static_cast<double>(n) / 8000.0, 8000.0, 200.0, 3000.0, rng);
  std::string detail;
  bool ok = true;
  for (const auto& [label, x] : {std::pair<const char*, const Signal*>{"tune", &tune}, {"noise", &noise}}) {
    const ScaleGrid g = make_scale_grid(grid, 8000.0);
    const Scalogram<double> w = cwt_fft(*x, g);
    const RealMatrix p = smoothed_power(w.coefficients, {});
    const RealMatrix c = wavelet_coherence(w, w).coherence;
    double worst = 0.0;
    std::size_t cells = 0;
    for (Eigen::Index i = 0; i < c.rows(); ++i)
      for (Eigen::Index t = 0; t < c.cols(); ++t)
        if (p(i, t) * p(i, t) > kDenominatorFloor) {
          worst = std::max(worst, std::abs(c(i, t) - 1.0));
          ++cells;
        }
    ok = ok && worst < kSelfCoherenceTol && cells > 0;
    detail += fmt("%s%s: max |C - 1| = %.2e over %zu cells", detail.empty() ? "" : "; ", label, worst, cells);
  }
  return {ok, detail};
}

Outcome phase_convention() {
  const double sr = 1000.0;
  const std::size_t n = 4096;
  const Signal s = testing::tone(25.0, n, sr), c = testing::tone(25.0, n, sr, std::numbers::pi / 2.0);
  const ScaleGrid g = make_scale_grid(12.5, 50.0, 3, sr);
  const Scalogram<double> ws = cwt_fft(s, g), wc = cwt_fft(c, g);
  const RealMatrix forward = phase_of(xwt(ws, wc)), backward = phase_of(xwt(wc, ws));
  std::vector<double> f, b;
  for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(n); ++t)
    if (g.scales[1] <= ws.coi[t]) {
      f.push_back(forward(1, t));
      b.push_back(backward(1, t));
    }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  const double mf = median(f), mb = median(b);
  const double half_pi = std::numbers::pi / 2.0;
  return {std::abs(g.frequencies[1] - 25.0) < 1e-9 && std::abs(mf + half_pi) < kPhaseTol &&
              std::abs(mb - half_pi) < kPhaseTol,
          fmt("median arg sine vs cosine %.4f rad, swapped %.4f rad", mf, mb)};
}

IdentifyConfig band_config(double f_max) {
  IdentifyConfig cfg;
  cfg.grid = GridConfig{200.0, f_max, 64};
  cfg.timbre = synth::Timbre::Sine;
  return cfg;
}

// Piano render with additive white noise at the requested SNR.
Signal noisy_recording(const TuneRecord& r, double snr_db) {
  RenderConfig piano;
  piano.seed = tune_seed(2024, r.tune_id);
  Signal x = render_setting(r, piano);
  const double signal_power = x.samples.squaredNorm() / static_cast<double>(x.size());
  const double noise_sd = std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(tune_seed(777, r.tune_id));
  std::normal_distribution<double> normal(0.0, noise_sd);
  for (auto& v : x.samples) v += normal(rng);
  return x;
}

struct BandRun {
  std::map<int, RankedMatches> ranked;  // by true tune_id
};

BandRun run_band(double f_max, FingerprintCache& cache) {
  const IdentifyConfig cfg = band_config(f_max);
  BandRun out;
  for (const TuneRecord& r : desk_base().records())
    out.ranked[r.tune_id] = identify(prepare_recording(noisy_recording(r, kSnrDb), cfg), cache, cfg);
  return out;
}

std::optional<FingerprintCache> focused_cache;
std::optional<BandRun> focused_run;

Outcome identification() {
  BandRun wide;
  {
    FingerprintCache cache = build_fingerprints(desk_base(), band_config(4000.0).fingerprint_config());
    wide = run_band(4000.0, cache);
  }
  focused_cache = build_fingerprints(desk_base(), band_config(1200.0).fingerprint_config());
  focused_run = run_band(1200.0, *focused_cache);

  int top1 = 0, directional = 0;
  std::string detail;
  for (const TuneRecord& r : desk_base().records()) {
    const RankedMatches& f = focused_run->ranked.at(r.tune_id);
    const RankedMatches& w = wide.ranked.at(r.tune_id);
    const bool hit = f.matches.front().tune_id == r.tune_id;
    top1 += hit;
    const double df = decisiveness(f), dw = decisiveness(w);
    directional += df >= dw;
    std::printf("  tune %2d %-26s top@1200 %-26s d1200 %.3f d4000 %.3f top@4000 %s\n", r.tune_id, r.name.c_str(),
                f.matches.front().name.c_str(), df, dw, w.matches.front().name.c_str());
  }
  return {top1 >= kRequiredTop1 && directional >= kRequiredDirectional,
          fmt("top-1 %d/10 (need %d), decisiveness 1200 >= 4000 on %d/10 (need %d)", top1, kRequiredTop1, directional,
              kRequiredDirectional)};
}

Outcome controls() {
  if (!focused_cache || !focused_run) return {false, "requires the identification run"};
  const IdentifyConfig cfg = band_config(1200.0);
  double weakest_match = 1e300;
  for (const auto& [id, ranked] : focused_run->ranked)
    for (const Match& m : ranked.matches)
      if (m.tune_id == id) weakest_match = std::min(weakest_match, m.gross);

  std::mt19937_64 rng(31);
  const Signal blank = synth::control_signal(synth::ControlKind::Blank, 19.2, 8000.0, 0.0, 0.0, rng);
  const Signal noise = synth::control_signal(synth::ControlKind::WhiteNoise, 19.2, 8000.0, 200.0, 3000.0, rng);
  IdentifyConfig raw = cfg;
  raw.calibrate = false;
  const RankedMatches b = identify(prepare_recording(blank, raw), *focused_cache, raw);
  const RankedMatches n = identify(prepare_recording(noise, raw), *focused_cache, raw);

  double strongest_control = 0.0, lo = 1e300, hi = 0.0, mean = 0.0;
  for (const Match& m : b.matches) strongest_control = std::max(strongest_control, m.gross);
  for (const Match& m : n.matches) {
    strongest_control = std::max(strongest_control, m.gross);
    lo = std::min(lo, m.gross);
    hi = std::max(hi, m.gross);
    mean += m.gross / static_cast<double>(n.size());
  }
  double blank_max = 0.0;
  for (const Match& m : b.matches) blank_max = std::max(blank_max, m.gross);
  const double spread = (hi - lo) / mean;
  return {strongest_control < weakest_match && blank_max == 0.0 && spread < kControlSpreadBound,
          fmt("strongest control %.1f < weakest matched %.1f; blank max %.1f; noise spread %.4f (bound %.2f)",
              strongest_control, weakest_match, blank_max, spread, kControlSpreadBound)};
}

Outcome scaling() {
  const auto path = std::filesystem::temp_directory_path() / "reelprint-acceptance-bench.csv";
  auto bench = [&](const std::string& impl, const std::string& sizes) {
    std::ostringstream out, err;
    const int code = cli::run_command(
        {"bench", "--impl", impl, "--samples", sizes, "--scales", "64", "--repeats", "5", "--out", path.string()}, out,
        err);
    if (code != 0) throw std::runtime_error("bench failed: " + err.str());
    std::map<long, double> t;
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::istringstream fields(line);
      std::string name, n, s, secs;
      std::getline(fields, name, ',');
      std::getline(fields, n, ',');
      std::getline(fields, s, ',');
      std::getline(fields, secs, ',');
      t[std::stol(n)] = std::stod(secs);
    }
    return t;
  };
  auto naive = bench("naive", "4096,8192");
  auto fast = bench("fft", "4097,8192,32768,65536");
  std::filesystem::remove(path);
  const double naive_ratio = naive.at(8192) / naive.at(4096);
  const double fft_ratio = fast.at(65536) / fast.at(32768);
  const double step = std::abs(fast.at(4097) - fast.at(8192)) / fast.at(8192);
  return {naive_ratio >= kNaiveRatioMin && fft_ratio <= kFftRatioMax && step <= kPaddingStepTol,
          fmt("naive 8192/4096 = %.2f (>= %.1f), fft 65536/32768 = %.2f (<= %.1f), fft |t(4097) - t(8192)| / t(8192) = "
              "%.2f (<= %.2f)",
              naive_ratio, kNaiveRatioMin, fft_ratio, kFftRatioMax, step, kPaddingStepTol)};
}

Outcome ranking_invariants() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> score(-100.0, 1000.0);
  int preserved = 0;
  for (int trial = 0; trial < kCalibrationTrials; ++trial) {
    TuneScores s;
    const int n = 2 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) s.emplace_back(std::to_string(i), score(rng));
    const TuneScores c = calibrate(s);
    bool same = c.size() == s.size();
    for (std::size_t i = 0; same && i < s.size(); ++i)
      for (std::size_t j = 0; same && j < s.size(); ++j)
        same = (s[i].second < s[j].second) == (c[i].second < c[j].second);
    preserved += same;
  }

  if (!focused_cache) return {false, "requires the identification run"};
  const IdentifyConfig cfg = band_config(1200.0);
  const Signal base = prepare_recording(noisy_recording(*desk_base().resolve("The Banshee").record, kSnrDb), cfg);
  std::vector<std::vector<int>> orders;
  for (double c : {0.1, 1.0, 10.0}) {
    Signal scaled = base;
    scaled.samples *= c;
    std::vector<int> order;
    for (const Match& m : identify(scaled, *focused_cache, cfg).matches) order.push_back(m.tune_id);
    orders.push_back(order);
  }
  const bool invariant = orders[0] == orders[1] && orders[1] == orders[2];
  return {preserved == kCalibrationTrials && invariant,
          fmt("calibration preserved order on %d/%d vectors; ranking %s under amplitude 0.1/1/10", preserved,
              kCalibrationTrials, invariant ? "identical" : "changed")};
}

}  // namespace

int main() {
  report(1, "pitch formula", pitch_formula);
  report(2, "pipeline dimensions", pipeline_dimensions);
  report(3, "transform equivalence", transform_equivalence);
  report(4, "FFT correctness", fft_correctness);
  report(5, "self-coherence", self_coherence);
  report(6, "phase convention", phase_convention);
  report(7, "identification at desk scale", identification);
  report(8, "control behavior", controls);
  report(9, "scaling behavior", scaling);
  report(10, "ranking invariants", ranking_invariants);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
