#include "reelprint/tunebase.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "reelprint/abc.hpp"
#include "reelprint/parallel.hpp"

namespace reelprint {

namespace {

using nlohmann::json;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

struct Fnv1a {
  std::uint64_t h = kFnvOffset;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= kFnvPrime;
    }
  }
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof v);
  }
};

bool has_key_field(std::string_view abc) {
  std::size_t pos = 0;
  while (pos < abc.size()) {
    const std::size_t end = std::min(abc.find('\n', pos), abc.size());
    std::string_view line = abc.substr(pos, end - pos);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.size() >= 2 && line[0] == 'K' && line[1] == ':') return true;
    pos = end + 1;
  }
  return false;
}

TuneRecord record_from_json(const json& j, std::size_t position) {
  const std::string where =
      j.is_object() && j.contains("tune_id") && j["tune_id"].is_number_integer()
          ? "tune_id " + std::to_string(j["tune_id"].get<int>())
          : "record #" + std::to_string(position);
  auto fail = [&](const std::string& why) -> TunebaseError {
    return TunebaseError(TunebaseErrc::SchemaError, where + ": " + why);
  };
  if (!j.is_object()) throw fail("not an object");
  TuneRecord r;
  if (!j.contains("tune_id") || !j["tune_id"].is_number_integer()) throw fail("missing integer tune_id");
  r.tune_id = j["tune_id"].get<int>();
  if (!j.contains("name") || !j["name"].is_string()) throw fail("missing name");
  r.name = j["name"].get<std::string>();
  if (j.contains("aliases")) {
    if (!j["aliases"].is_array()) throw fail("aliases is not an array");
    for (const auto& a : j["aliases"]) {
      if (!a.is_string()) throw fail("alias is not a string");
      r.aliases.push_back(a.get<std::string>());
    }
  }
  if (j.contains("rhythm") && j["rhythm"].is_string()) r.rhythm = j["rhythm"].get<std::string>();
  if (j.contains("mode") && j["mode"].is_string()) r.mode = j["mode"].get<std::string>();
  if (!j.contains("settings") || !j["settings"].is_array()) throw fail("missing settings array");
  if (j["settings"].empty()) throw fail("settings array is empty");

  std::vector<std::pair<int, std::string>> settings;
  for (const auto& s : j["settings"]) {
    if (!s.is_object() || !s.contains("abc") || !s["abc"].is_string()) throw fail("setting without abc text");
    const int index = s.contains("setting") && s["setting"].is_number_integer()
                          ? s["setting"].get<int>()
                          : static_cast<int>(settings.size()) + 1;
    settings.emplace_back(index, s["abc"].get<std::string>());
  }
  std::stable_sort(settings.begin(), settings.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& s : settings) r.settings.push_back(std::move(s.second));
  return r;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(const unsigned char* b, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

constexpr std::uint32_t kCacheVersion = 1;

}  // namespace

std::string preprocess_string(std::string_view text) {
  std::string lower;
  lower.reserve(text.size());
  for (unsigned char c : text) lower.push_back(static_cast<char>(std::tolower(c)));
  std::string_view view = lower;
  while (!view.empty() && std::isspace(static_cast<unsigned char>(view.front()))) view.remove_prefix(1);
  if (view.starts_with("the ")) view.remove_prefix(4);
  std::string out;
  for (unsigned char c : view)
    if (std::isalnum(c) && c < 0x80) out.push_back(static_cast<char>(c));
  return out;
}

std::string setting_abc(const TuneRecord& record, std::size_t setting) {
  if (setting < 1 || setting > record.settings.size())
    throw TunebaseError(TunebaseErrc::SettingOutOfRange,
                        record.name + " has " + std::to_string(record.settings.size()) + " settings, asked for " +
                            std::to_string(setting));
  const std::string& abc = record.settings[setting - 1];
  if (has_key_field(abc)) return abc;
  std::ostringstream out;
  out << "X:" << setting << "\nT:" << record.name << "\nR:" << record.rhythm << "\nM:4/4\nL:1/8\nK:"
      << (record.mode.empty() ? "C" : record.mode) << "\n"
      << abc << "\n";
  return out.str();
}

TuneBase::TuneBase(std::vector<TuneRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    by_name_.emplace(preprocess_string(records_[i].name), i);
    for (const auto& alias : records_[i].aliases) by_alias_.emplace(preprocess_string(alias), i);
  }
}

TuneBase::Resolved TuneBase::resolve(std::string_view name_or_alias, std::size_t setting) const {
  const std::string key = preprocess_string(name_or_alias);
  std::optional<std::size_t> index;
  if (auto it = by_name_.find(key); it != by_name_.end()) {
    index = it->second;
  } else if (auto alias = by_alias_.find(key); alias != by_alias_.end()) {
    index = alias->second;
  }
  if (!index || key.empty())
    throw TunebaseError(TunebaseErrc::UnknownTune, "no tune named '" + std::string(name_or_alias) + "'");
  const TuneRecord& r = records_[*index];
  return {&r, setting, r.settings.size(), setting_abc(r, setting)};
}

TuneBase parse_tunebase(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw TunebaseError(TunebaseErrc::SchemaError, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw TunebaseError(TunebaseErrc::SchemaError, "top level must be an array");
  std::vector<TuneRecord> records;
  records.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) records.push_back(record_from_json(doc[i], i));
  return TuneBase(std::move(records));
}

TuneBase load_tunebase(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TunebaseError(TunebaseErrc::FileNotFound, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_tunebase(text.str());
}

std::uint64_t FingerprintConfig::hash() const {
  Fnv1a h;
  h.value(static_cast<int>(render.timbre));
  h.value(render.bpm);
  h.value(render.sample_rate);
  h.value(render.seed);
  h.value(static_cast<std::uint64_t>(render.setting));
  h.value(grid.f_min);
  h.value(grid.f_max);
  h.value(static_cast<std::int64_t>(grid.count));
  h.value(static_cast<int>(grid.spacing));
  h.value(morlet.f0);
  return h.h;
}

std::uint64_t tune_seed(std::uint64_t seed, int tune_id) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(tune_id) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Signal render_setting(const TuneRecord& record, const RenderConfig& render) {
  const abc::SemitoneSequence seq = abc::semitones_from_abc(setting_abc(record, render.setting));
  std::mt19937_64 rng(tune_seed(render.seed, record.tune_id));
  return synth::render_tune(seq, render.timbre, render.bpm, render.sample_rate, rng);
}

const Fingerprint* FingerprintCache::find(int tune_id) const {
  for (const auto& e : entries_)
    if (e.tune_id == tune_id) return &e;
  return nullptr;
}

void FingerprintCache::add(Fingerprint fp) {
  if (scoring_) fp.smoothed_power = smoothed_power(fp.scalogram.coefficients, *scoring_);
  entries_.push_back(std::move(fp));
}

void FingerprintCache::prepare_scoring(const SmoothingConfig& smoothing, const TransformOptions& options) {
  smoothing.validate();
  if (scoring_ && *scoring_ == smoothing) return;
  parallel_for(entries_.size(), options.threads, [&](std::size_t i) {
    entries_[i].smoothed_power = smoothed_power(entries_[i].scalogram.coefficients, smoothing);
  });
  scoring_ = smoothing;
}

FingerprintCache build_fingerprints(const TuneBase& base, const FingerprintConfig& config, BuildReport* report,
                                    const TransformOptions& options) {
  FingerprintCache cache(config);
  const ScaleGrid grid = make_scale_grid(config.grid, config.render.sample_rate, config.morlet);
  for (const auto& record : base.records()) {
    Signal rendered;
    try {
      rendered = render_setting(record, config.render);
    } catch (const Error& e) {
      if (report) report->skipped.push_back({record.tune_id, record.name, e.what()});
      continue;
    }
    cache.add({record.tune_id, record.name, cwt_fft<double>(rendered, grid, config.morlet, options), {}});
  }
  return cache;
}

FingerprintCache load_or_build_fingerprints(const TuneBase& base, const FingerprintConfig& config,
                                            const std::filesystem::path& dir, BuildReport* report,
                                            const TransformOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw TunebaseError(TunebaseErrc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  FingerprintCache cache(config);
  const ScaleGrid grid = make_scale_grid(config.grid, config.render.sample_rate, config.morlet);
  const std::uint64_t hash = config.hash();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
  for (const auto& record : base.records()) {
    const auto file = dir / (std::to_string(record.tune_id) + "-" + hex + ".wcfp");
    Signal rendered;
    try {
      rendered = render_setting(record, config.render);
    } catch (const Error& e) {
      if (report) report->skipped.push_back({record.tune_id, record.name, e.what()});
      continue;
    }
    Fingerprint fp{record.tune_id, record.name, {}, {}};
    fp.scalogram.grid = grid;
    fp.scalogram.sample_rate = config.render.sample_rate;
    fp.scalogram.coi = cone_of_influence(rendered.size(), grid);
    bool loaded = false;
    if (std::filesystem::exists(file)) {
      try {
        fp.scalogram.coefficients = load_scalogram(file, hash);
        loaded = fp.scalogram.coefficients.rows() == grid.count() &&
                 fp.scalogram.coefficients.cols() == static_cast<Eigen::Index>(rendered.size());
      } catch (const TunebaseError&) {
        loaded = false;
      }
    }
    if (!loaded) {
      fp.scalogram = cwt_fft<double>(rendered, grid, config.morlet, options);
      save_scalogram(file, fp.scalogram.coefficients, hash);
    }
    cache.add(std::move(fp));
  }
  return cache;
}

void save_scalogram(const std::filesystem::path& path, const ComplexMatrix<double>& coefficients,
                    std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TunebaseError(TunebaseErrc::IoError, "cannot write " + path.string());
  out.write("WCFP", 4);
  put_u32(out, kCacheVersion);
  put_u64(out, static_cast<std::uint64_t>(coefficients.rows()));
  put_u64(out, static_cast<std::uint64_t>(coefficients.cols()));
  put_u64(out, config_hash);
  std::vector<unsigned char> row(static_cast<std::size_t>(coefficients.cols()) * 16);
  for (Eigen::Index i = 0; i < coefficients.rows(); ++i) {
    for (Eigen::Index t = 0; t < coefficients.cols(); ++t) {
      const double parts[2] = {coefficients(i, t).real(), coefficients(i, t).imag()};
      for (int p = 0; p < 2; ++p) {
        const auto bits = std::bit_cast<std::uint64_t>(parts[p]);
        for (int b = 0; b < 8; ++b)
          row[static_cast<std::size_t>(t) * 16 + static_cast<std::size_t>(p * 8 + b)] =
              static_cast<unsigned char>(bits >> (8 * b));
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw TunebaseError(TunebaseErrc::IoError, "short write to " + path.string());
}

ComplexMatrix<double> load_scalogram(const std::filesystem::path& path, std::uint64_t expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TunebaseError(TunebaseErrc::FileNotFound, "cannot open " + path.string());
  unsigned char header[32];
  if (!in.read(reinterpret_cast<char*>(header), 32) || std::memcmp(header, "WCFP", 4) != 0)
    throw TunebaseError(TunebaseErrc::IoError, path.string() + " is not a scalogram cache file");
  if (get_u64(header + 4, 4) != kCacheVersion)
    throw TunebaseError(TunebaseErrc::CacheMismatch, path.string() + " has an unknown version");
  const auto rows = static_cast<Eigen::Index>(get_u64(header + 8, 8));
  const auto cols = static_cast<Eigen::Index>(get_u64(header + 16, 8));
  if (get_u64(header + 24, 8) != expected_hash)
    throw TunebaseError(TunebaseErrc::CacheMismatch, path.string() + " was built under a different configuration");
  ComplexMatrix<double> m(rows, cols);
  std::vector<unsigned char> row(static_cast<std::size_t>(cols) * 16);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size())))
      throw TunebaseError(TunebaseErrc::IoError, path.string() + " is truncated");
    for (Eigen::Index t = 0; t < cols; ++t) {
      const unsigned char* p = row.data() + static_cast<std::size_t>(t) * 16;
      m(i, t) = {std::bit_cast<double>(get_u64(p, 8)), std::bit_cast<double>(get_u64(p + 8, 8))};
    }
  }
  return m;
}

}  // namespace reelprint
