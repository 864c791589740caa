#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "reelprint/coherence.hpp"
#include "reelprint/fourier.hpp"
#include "reelprint/heatmap.hpp"
#include "reelprint/identify.hpp"
#include "reelprint/synthesis.hpp"
#include "reelprint/timefreq.hpp"
#include "reelprint/tunebase.hpp"
#include "reelprint/wav.hpp"

namespace reelprint::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridFlags {
  double f_min = 200.0;
  double f_max = 1200.0;
  Eigen::Index count = 200;
  double f0 = 5.0;
  bool linear = false;

  void add_to(CLI::App* app) {
    app->add_option("--fmin", f_min, "lowest frequency (Hz)")->capture_default_str();
    app->add_option("--fmax", f_max, "highest frequency (Hz)")->capture_default_str();
    app->add_option("--nfreqs", count, "number of scales")->capture_default_str();
    app->add_option("--f0", f0, "Morlet central frequency")->capture_default_str();
    app->add_flag("--linear", linear, "linear instead of logarithmic frequency spacing");
  }
  GridConfig grid() const { return {f_min, f_max, count, linear ? Spacing::Linear : Spacing::Log}; }
  MorletParams morlet() const { return {f0}; }
};

Signal read_mono(const std::string& path) { return read_wav(path).to_mono(); }

std::ofstream open_text(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

template <typename T>
T median(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

RealMatrix magnitudes(const ComplexMatrix<double>& w) { return w.cwiseAbs(); }

// Grid for timing at length n: fixed top at sample_rate / 4, bottom at the
// frequency whose scale (n - 1) / (2 sqrt 2) is the widest with any
// coefficient inside the cone of influence.
ScaleGrid bench_grid(std::size_t n, Eigen::Index scales, double sample_rate, const MorletParams& morlet) {
  const double widest = static_cast<double>(n - 1) / (2.0 * std::numbers::sqrt2);
  const double f_max = sample_rate / 4.0;
  const double f_min = frequency_for_scale(widest, sample_rate, morlet.f0);
  if (!(f_min < f_max)) throw UsageError("signal length " + std::to_string(n) + " is too short to benchmark");
  return make_scale_grid(f_min, f_max, scales, sample_rate, morlet);
}

void add_synth(CLI::App& app, std::function<void()>& action, std::ostream& out) {
  auto* cmd = app.add_subcommand("synth", "render a tune from the tunebase to WAV");
  auto name = std::make_shared<std::string>();
  auto tunebase = std::make_shared<std::string>();
  auto path = std::make_shared<std::string>();
  auto timbre = std::make_shared<std::string>("piano");
  auto render = std::make_shared<RenderConfig>();
  cmd->add_option("tune", *name, "tune name or alias")->required();
  cmd->add_option("--setting", render->setting, "setting index (from 1)")->capture_default_str();
  cmd->add_option("--timbre", *timbre, "sine, piano or banjo")
      ->check(CLI::IsMember({"sine", "piano", "banjo"}))
      ->capture_default_str();
  cmd->add_option("--bpm", render->bpm)->capture_default_str();
  cmd->add_option("--sr", render->sample_rate)->capture_default_str();
  cmd->add_option("--seed", render->seed)->capture_default_str();
  cmd->add_option("--tunebase", *tunebase, "tunebase JSON")->required();
  cmd->add_option("--out", *path, "output WAV")->required();
  cmd->callback([=, &action, &out] {
    action = [=, &out] {
      const TuneBase base = load_tunebase(*tunebase);
      RenderConfig r = *render;
      r.timbre = synth::parse_timbre(*timbre);
      const auto resolved = base.resolve(*name, r.setting);
      const Signal s = render_setting(*resolved.record, r);
      write_wav(*path, s);
      out << resolved.record->name << '\t' << s.size() << " samples\t" << s.duration() << " s\n";
    };
  });
}

void add_scalogram(CLI::App& app, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("scalogram", "Morlet CWT magnitude heatmap");
  auto input = std::make_shared<std::string>();
  auto path = std::make_shared<std::string>();
  auto csv = std::make_shared<std::string>();
  auto impl = std::make_shared<std::string>("fft");
  auto grid = std::make_shared<GridFlags>();
  auto coi = std::make_shared<bool>(false);
  auto decimate = std::make_shared<std::size_t>(1);
  cmd->add_option("input", *input, "input WAV")->required();
  grid->add_to(cmd);
  cmd->add_option("--impl", *impl)->check(CLI::IsMember({"naive", "fft"}))->capture_default_str();
  cmd->add_option("--out", *path, "output PGM")->required();
  cmd->add_option("--csv", *csv, "also write time_s,freq_hz,magnitude rows");
  cmd->add_flag("--coi", *coi, "draw the cone of influence");
  cmd->add_option("--decimate", *decimate, "keep every k-th column")->check(CLI::PositiveNumber);
  cmd->callback([=, &action] {
    action = [=] {
      const Signal x = read_mono(*input);
      const ScaleGrid g = make_scale_grid(grid->grid(), x.sample_rate, grid->morlet());
      const Scalogram<double> w =
          *impl == "naive" ? cwt_naive<double>(x, g, grid->morlet()) : cwt_fft<double>(x, g, grid->morlet());
      const RealMatrix mag = magnitudes(w.coefficients);
      GrayImage img = render_heatmap(mag, {*decimate, std::nullopt, false});
      if (*coi) draw_coi(img, w.coi, g, *decimate);
      write_pgm(*path, img);
      if (!csv->empty()) {
        auto f = open_text(*csv);
        f << "time_s,freq_hz,magnitude\n" << std::setprecision(10);
        for (Eigen::Index i = 0; i < mag.rows(); ++i)
          for (Eigen::Index t = 0; t < mag.cols(); t += static_cast<Eigen::Index>(*decimate))
            f << static_cast<double>(t) / x.sample_rate << ',' << g.frequencies[i] << ',' << mag(i, t) << '\n';
      }
    };
  });
}

void add_gabor(CLI::App& app, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("gabor", "Gaussian-windowed STFT magnitude heatmap");
  auto input = std::make_shared<std::string>();
  auto path = std::make_shared<std::string>();
  auto window = std::make_shared<std::size_t>(1500);
  auto sigma = std::make_shared<double>(250.0);
  auto hop = std::make_shared<std::size_t>(100);
  auto bins = std::make_shared<std::size_t>(0);
  cmd->add_option("input", *input, "input WAV")->required();
  cmd->add_option("--window", *window, "window length (samples)")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", *sigma, "window standard deviation (samples)")->required();
  cmd->add_option("--hop", *hop, "frame step (samples)")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--bins", *bins, "frequency bins from 0 to Nyquist (default window/2 + 1)");
  cmd->add_option("--out", *path, "output PGM")->required();
  cmd->callback([=, &action] {
    action = [=] {
      const Signal x = read_mono(*input);
      const std::size_t b = *bins ? *bins : *window / 2 + 1;
      const GaborResult g = gabor_transform(x, *window, *sigma, *hop, b);
      write_pgm(*path, render_heatmap(g.magnitudes, {1, std::nullopt, true}));
    };
  });
}

void add_fftmag(CLI::App& app, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("fftmag", "magnitude spectrum as CSV");
  auto input = std::make_shared<std::string>();
  auto path = std::make_shared<std::string>();
  cmd->add_option("input", *input, "input WAV")->required();
  cmd->add_option("--out", *path, "output CSV")->required();
  cmd->callback([=, &action] {
    action = [=] {
      const Signal x = read_mono(*input);
      const Spectrum<double> s = fft(x);
      auto f = open_text(*path);
      f << "freq_hz,magnitude\n" << std::setprecision(12);
      for (std::size_t k = 0; k <= s.size() / 2; ++k)
        f << static_cast<double>(k) * s.bin_hz << ',' << std::abs(s.coefficients[static_cast<Eigen::Index>(k)])
          << '\n';
    };
  });
}

void add_coherence(CLI::App& app, std::function<void()>& action, std::ostream& out) {
  auto* cmd = app.add_subcommand("coherence", "wavelet coherence heatmap of two recordings");
  auto a = std::make_shared<std::string>();
  auto b = std::make_shared<std::string>();
  auto path = std::make_shared<std::string>();
  auto phase = std::make_shared<std::string>();
  auto grid = std::make_shared<GridFlags>();
  auto smoothing = std::make_shared<SmoothingConfig>();
  auto coi = std::make_shared<bool>(false);
  auto decimate = std::make_shared<std::size_t>(1);
  auto scale_stride = std::make_shared<std::size_t>(16);
  auto time_stride = std::make_shared<std::size_t>(512);
  cmd->add_option("a", *a, "first WAV")->required();
  cmd->add_option("b", *b, "second WAV")->required();
  grid->add_to(cmd);
  cmd->add_option("--sigma-scale", smoothing->sigma_scale)->capture_default_str();
  cmd->add_option("--sigma-time", smoothing->sigma_time)->capture_default_str();
  cmd->add_option("--out", *path, "output PGM")->required();
  cmd->add_option("--phase", *phase, "write time_s,freq_hz,angle_rad rows");
  cmd->add_option("--phase-scale-stride", *scale_stride)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--phase-time-stride", *time_stride)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--coi", *coi, "draw the cone of influence");
  cmd->add_option("--decimate", *decimate, "keep every k-th column")->check(CLI::PositiveNumber);
  cmd->callback([=, &action, &out] {
    action = [=, &out] {
      const Signal x = read_mono(*a);
      const Signal y = read_mono(*b);
      const CoherenceResult r = wavelet_coherence(x, y, grid->grid(), grid->morlet(), *smoothing);
      GrayImage img = render_heatmap(r.coherence, {*decimate, std::pair{0.0, 1.0}, false});
      if (*coi) draw_coi(img, r.coi, r.grid, *decimate);
      write_pgm(*path, img);
      if (!phase->empty()) write_phase_csv(*phase, r.phase, r.grid, x.sample_rate, *scale_stride, *time_stride);
      out << "gross\t" << std::setprecision(10) << gross_coherence(r, *coi) << '\n';
    };
  });
}

void add_identify(CLI::App& app, std::function<void()>& action, std::ostream& out, std::ostream& err) {
  auto* cmd = app.add_subcommand("identify", "rank tunebase entries against a recording");
  auto input = std::make_shared<std::string>();
  auto tunebase = std::make_shared<std::string>();
  auto cache_dir = std::make_shared<std::string>();
  auto timbre = std::make_shared<std::string>("piano");
  auto cfg = std::make_shared<IdentifyConfig>();
  auto grid = std::make_shared<GridFlags>();
  auto top = std::make_shared<std::size_t>(0);
  auto no_calibrate = std::make_shared<bool>(false);
  auto seed = std::make_shared<std::uint64_t>(0);
  auto setting = std::make_shared<std::size_t>(1);
  cmd->add_option("input", *input, "recording WAV")->required();
  cmd->add_option("--tunebase", *tunebase, "tunebase JSON")->required();
  grid->add_to(cmd);
  cmd->add_option("--timbre", *timbre, "fingerprint timbre")
      ->check(CLI::IsMember({"sine", "piano", "banjo"}))
      ->capture_default_str();
  cmd->add_option("--bpm", cfg->bpm)->capture_default_str();
  cmd->add_option("--sr", cfg->sample_rate)->capture_default_str();
  cmd->add_option("--seed", *seed)->capture_default_str();
  cmd->add_option("--setting", *setting)->capture_default_str();
  cmd->add_option("--top", *top, "rows to print (0 = all)");
  cmd->add_flag("--no-calibrate", *no_calibrate);
  cmd->add_flag("--coi-only", cfg->restrict_to_coi, "only sum coherence inside the cone of influence");
  cmd->add_option("--cache-dir", *cache_dir, "directory of persisted fingerprints");
  cmd->callback([=, &action, &out, &err] {
    action = [=, &out, &err] {
      IdentifyConfig c = *cfg;
      c.grid = grid->grid();
      c.morlet = grid->morlet();
      c.timbre = synth::parse_timbre(*timbre);
      c.calibrate = !*no_calibrate;
      c.validate();
      const TuneBase base = load_tunebase(*tunebase);
      const Signal rec = prepare_recording(read_wav(*input), c);
      BuildReport report;
      FingerprintCache cache = cache_dir->empty()
                                   ? build_fingerprints(base, c.fingerprint_config(*seed, *setting), &report)
                                   : load_or_build_fingerprints(base, c.fingerprint_config(*seed, *setting),
                                                                *cache_dir, &report);
      for (const auto& s : report.skipped) err << "skipped " << s.name << ": " << s.error << '\n';
      const RankedMatches ranked = identify(rec, cache, c);
      const std::size_t rows = *top ? std::min(*top, ranked.size()) : ranked.size();
      out << std::fixed << std::setprecision(3);
      for (std::size_t i = 0; i < rows; ++i) {
        const Match& m = ranked.matches[i];
        out << m.name << '\t' << m.gross << '\t' << m.calibrated << '\n';
      }
    };
  });
}

void add_bench(CLI::App& app, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("bench", "time the naive and FFT transforms");
  auto impls = std::make_shared<std::vector<std::string>>(std::vector<std::string>{"naive", "fft"});
  auto sizes = std::make_shared<std::vector<std::size_t>>();
  auto scales = std::make_shared<Eigen::Index>(64);
  auto repeats = std::make_shared<std::size_t>(5);
  auto path = std::make_shared<std::string>();
  auto sample_rate = std::make_shared<double>(8000.0);
  auto seed = std::make_shared<std::uint64_t>(0);
  cmd->add_option("--impl", *impls, "comma-separated list of naive, fft")
      ->delimiter(',')
      ->check(CLI::IsMember({"naive", "fft"}))
      ->capture_default_str();
  cmd->add_option("--samples", *sizes, "comma-separated signal lengths")->delimiter(',')->required();
  cmd->add_option("--scales", *scales)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--repeats", *repeats)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--sr", *sample_rate)->capture_default_str();
  cmd->add_option("--seed", *seed)->capture_default_str();
  cmd->add_option("--out", *path, "output CSV")->required();
  cmd->callback([=, &action] {
    action = [=] {
      const MorletParams morlet;
      const TransformOptions sequential{1};
      std::ostringstream csv;
      csv << "impl,N,S,seconds\n" << std::setprecision(9);
      for (const auto& impl : *impls) {
        for (std::size_t n : *sizes) {
          std::mt19937_64 rng(*seed);
          std::normal_distribution<double> normal;
          Signal x{Eigen::VectorXd(static_cast<Eigen::Index>(n)), *sample_rate};
          for (auto& v : x.samples) v = normal(rng);
          const ScaleGrid g = bench_grid(n, *scales, *sample_rate, morlet);
          auto run = [&] {
            return impl == "naive" ? cwt_naive<double>(x, g, morlet, sequential)
                                   : cwt_fft<double>(x, g, morlet, sequential);
          };
          run();  // warm caches
          std::vector<double> seconds;
          for (std::size_t r = 0; r < *repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto w = run();
            const auto t1 = std::chrono::steady_clock::now();
            seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
          }
          csv << impl << ',' << n << ',' << *scales << ',' << median(seconds) << '\n';
        }
      }
      auto f = open_text(*path);
      f << csv.str();
    };
  });
}

void add_control(CLI::App& app, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("control", "write a blank or band-noise control signal");
  auto kind = std::make_shared<std::string>();
  auto band = std::make_shared<std::vector<double>>(std::vector<double>{200.0, 3000.0});
  auto duration = std::make_shared<double>(19.2);
  auto sample_rate = std::make_shared<double>(8000.0);
  auto seed = std::make_shared<std::uint64_t>(0);
  auto path = std::make_shared<std::string>();
  cmd->add_option("--kind", *kind)->check(CLI::IsMember({"blank", "noise"}))->required();
  cmd->add_option("--band", *band, "LO,HI in Hz")->delimiter(',')->expected(2)->capture_default_str();
  cmd->add_option("--duration", *duration)->capture_default_str();
  cmd->add_option("--sr", *sample_rate)->capture_default_str();
  cmd->add_option("--seed", *seed)->capture_default_str();
  cmd->add_option("--out", *path, "output WAV")->required();
  cmd->callback([=, &action] {
    if (band->size() != 2) throw UsageError("--band needs exactly two values");
    action = [=] {
      std::mt19937_64 rng(*seed);
      const auto k = *kind == "blank" ? synth::ControlKind::Blank : synth::ControlKind::WhiteNoise;
      write_wav(*path, synth::control_signal(k, *duration, *sample_rate, (*band)[0], (*band)[1], rng));
    };
  });
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tune fingerprinting with Morlet wavelet coherence", "reelprint"};
  app.require_subcommand(1, 1);
  std::function<void()> action;
  add_synth(app, action, out);
  add_scalogram(app, action);
  add_gabor(app, action);
  add_fftmag(app, action);
  add_coherence(app, action, out);
  add_identify(app, action, out, err);
  add_bench(app, action);
  add_control(app, action);

  std::vector<std::string> argv_store{"reelprint"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace reelprint::cli
