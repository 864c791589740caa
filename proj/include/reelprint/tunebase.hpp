#pragma once

// Tune metadata and ABC settings loaded from a JSON export, name/alias
// resolution, and synthetic fingerprints (scalograms of rendered settings).
//
// JSON schema: a top-level array of
//   {"tune_id": int, "name": string, "aliases": [string], "rhythm": string,
//    "mode": string, "settings": [{"setting": int, "abc": string}]}

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reelprint/coherence.hpp"
#include "reelprint/synthesis.hpp"
#include "reelprint/timefreq.hpp"

namespace reelprint {

enum class TunebaseErrc { FileNotFound, SchemaError, UnknownTune, SettingOutOfRange, CacheMismatch, IoError };
using TunebaseError = CodedError<TunebaseErrc>;

struct TuneRecord {
  int tune_id = 0;
  std::string name;
  std::vector<std::string> aliases;
  std::string rhythm;
  std::string mode;                   ///< e.g. "Gmajor", "Edorian"
  std::vector<std::string> settings;  ///< ABC text; setting k is settings[k - 1]
};

/// Lowercase, drop a leading "the ", keep only [a-z0-9].
std::string preprocess_string(std::string_view text);

/// ABC for setting `setting` (1-based). A setting without its own K: field
/// gets X/T/R/M/L/K headers synthesized from the record.
std::string setting_abc(const TuneRecord& record, std::size_t setting);

class TuneBase {
 public:
  TuneBase() = default;
  explicit TuneBase(std::vector<TuneRecord> records);

  const std::vector<TuneRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  struct Resolved {
    const TuneRecord* record = nullptr;
    std::size_t setting = 1;
    std::size_t setting_count = 0;
    std::string abc;
  };

  /// Exact normalized name first, then aliases.
  Resolved resolve(std::string_view name_or_alias, std::size_t setting = 1) const;

 private:
  std::vector<TuneRecord> records_;
  std::map<std::string, std::size_t> by_name_;
  std::map<std::string, std::size_t> by_alias_;
};

TuneBase parse_tunebase(std::string_view json_text);
TuneBase load_tunebase(const std::filesystem::path& path);

struct RenderConfig {
  synth::Timbre timbre = synth::Timbre::Piano;
  double bpm = 100.0;
  double sample_rate = 8000.0;
  std::uint64_t seed = 0;
  std::size_t setting = 1;
  bool operator==(const RenderConfig&) const = default;
};

struct FingerprintConfig {
  RenderConfig render;
  GridConfig grid;
  MorletParams morlet;

  /// FNV-1a over every field; changes whenever any parameter does.
  std::uint64_t hash() const;
  bool operator==(const FingerprintConfig&) const = default;
};

/// Noise seed for one tune's render.
std::uint64_t tune_seed(std::uint64_t seed, int tune_id);

/// parse -> normalize -> encode -> render for one record.
Signal render_setting(const TuneRecord& record, const RenderConfig& render);

struct Fingerprint {
  int tune_id = 0;
  std::string name;
  Scalogram<double> scalogram;
  RealMatrix smoothed_power;  ///< S(|W|^2), filled by prepare_scoring
};

struct SkippedTune {
  int tune_id = 0;
  std::string name;
  std::string error;
};

class FingerprintCache {
 public:
  FingerprintCache() = default;
  explicit FingerprintCache(FingerprintConfig config) : config_(config) {}

  const FingerprintConfig& config() const { return config_; }
  std::uint64_t config_hash() const { return config_.hash(); }
  const std::vector<Fingerprint>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const Fingerprint* find(int tune_id) const;

  void add(Fingerprint fp);

  /// Precomputes S(|W|^2) for every entry under `smoothing`.
  void prepare_scoring(const SmoothingConfig& smoothing, const TransformOptions& options = {});
  const std::optional<SmoothingConfig>& scoring_smoothing() const { return scoring_; }

 private:
  FingerprintConfig config_;
  std::vector<Fingerprint> entries_;
  std::optional<SmoothingConfig> scoring_;
};

struct BuildReport {
  std::vector<SkippedTune> skipped;
};

/// Tunes that fail to parse, normalize or encode are listed in the report
/// and left out of the cache.
FingerprintCache build_fingerprints(const TuneBase& base, const FingerprintConfig& config,
                                    BuildReport* report = nullptr, const TransformOptions& options = {});

/// As build_fingerprints, but each scalogram is read from
/// `dir`/<tune_id>-<config hash>.wcfp when present and written there
/// otherwise.
FingerprintCache load_or_build_fingerprints(const TuneBase& base, const FingerprintConfig& config,
                                            const std::filesystem::path& dir, BuildReport* report = nullptr,
                                            const TransformOptions& options = {});

/// Binary scalogram file: 32-byte header ("WCFP", u32 version, u64 scales,
/// u64 timesteps, u64 config hash), then little-endian f64 (re, im) pairs
/// in row-major order.
void save_scalogram(const std::filesystem::path& path, const ComplexMatrix<double>& coefficients,
                    std::uint64_t config_hash);

/// Throws CacheMismatch when the stored hash differs from `expected_hash`.
ComplexMatrix<double> load_scalogram(const std::filesystem::path& path, std::uint64_t expected_hash);

}  // namespace reelprint
