#pragma once

// A subset of ABC notation sufficient for reels as published on tune
// archives: header fields X/T/R/M/L/K, notes with accidentals, octave marks
// and length multipliers, rests, triplets, ties, bar lines, repeats and
// first/second endings. Decorations, grace notes, slurs and chord symbols
// are recognised and dropped.

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "reelprint/core.hpp"

namespace reelprint::abc {

enum class AbcErrc { MissingHeaderField, UnparsableToken, WrongSlotCount, UnsupportedRhythm, OutOfRangePitch };

class AbcError : public CodedError<AbcErrc> {
 public:
  AbcError(AbcErrc code, const std::string& what, int line = 0, int column = 0)
      : CodedError(code, what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Non-negative rational used for meters and note lengths.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Fraction() = default;
  Fraction(std::int64_t n, std::int64_t d = 1);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Fraction operator+(const Fraction& o) const { return {num * o.den + o.num * den, den * o.den}; }
  Fraction operator-(const Fraction& o) const { return {num * o.den - o.num * den, den * o.den}; }
  Fraction operator*(const Fraction& o) const { return {num * o.num, den * o.den}; }
  Fraction operator/(const Fraction& o) const { return {num * o.den, den * o.num}; }
  bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }
  auto operator<=>(const Fraction& o) const { return num * o.den <=> o.num * den; }
};

enum class Mode { Major, Minor, Dorian, Mixolydian };

enum class Accidental { DoubleFlat = -2, Flat = -1, Natural = 0, Sharp = 1, DoubleSharp = 2 };

struct KeySignature {
  char tonic = 'C';              ///< uppercase letter A..G
  int tonic_accidental = 0;      ///< -1 flat, +1 sharp
  Mode mode = Mode::Major;
  std::set<char> sharpened;      ///< uppercase letters
  std::set<char> flattened;

  /// Semitone shift the signature applies to a letter (any case).
  int shift(char letter) const;
  /// Number of sharps (positive) or flats (negative) in the signature.
  int fifths() const;
};

/// Parses "G", "Gmaj", "Gmajor", "Em", "Edor", "Amixolydian", "F#m", "Bb".
KeySignature parse_key(std::string_view text);

enum class TokenKind { Note, Rest };

struct NoteToken {
  TokenKind kind = TokenKind::Note;
  char letter = 'C';                       ///< as written: A..G or a..g
  int octave_marks = 0;                    ///< +1 per ', -1 per ,
  std::optional<Accidental> accidental;    ///< inline accidental as written
  Fraction length{1};                      ///< multiple of the unit note length
  int triplet_position = 0;                ///< 1..3 inside a (3 group, else 0
  bool tied_to_next = false;
  int line = 0;
  int column = 0;
};

struct Bar {
  std::vector<NoteToken> tokens;
  bool starts_repeat = false;
  bool ends_repeat = false;
  int ending = 0;   ///< 1, 2, ... when the bar begins a numbered ending
};

enum class RepeatKind { Start, End, Ending };

struct RepeatMarker {
  std::size_t bar_index = 0;  ///< bar the marker precedes (Start, Ending) or closes (End)
  RepeatKind kind = RepeatKind::Start;
  int ending = 0;
};

struct TuneScore {
  int index = 0;  ///< X: field
  std::string title;
  std::string rhythm;
  Fraction meter{4, 4};
  Fraction unit_length{1, 8};
  KeySignature key;
  std::vector<Bar> bars;
  std::vector<RepeatMarker> repeat_markers;
};

TuneScore parse_abc(std::string_view text);

/// Letter, octave and accidental of one grid slot. `accidental` already
/// includes any inline accidental carried forward within its bar.
struct Pitch {
  char letter = 'C';
  int octave_marks = 0;
  std::optional<Accidental> accidental;
  bool operator==(const Pitch&) const = default;
};

inline constexpr std::size_t kGridSlots = 128;

struct NoteGrid {
  std::array<std::optional<Pitch>, kGridSlots> slots;  ///< nullopt = rest
};

/// Expands long notes, reduces triplets to their outer notes, plays each
/// repeated part once and drops trailing post-repeat tags, yielding exactly
/// 128 eighth-note slots.
NoteGrid normalize_to_grid(const TuneScore& score);

struct SemitoneSequence {
  std::array<std::optional<int>, kGridSlots> values;  ///< semitones above middle C
};

inline constexpr int kMinSemitone = -24;
inline constexpr int kMaxSemitone = 48;

/// Semitones above middle C for a single pitch under a key signature.
int encode_pitch(const Pitch& pitch, const KeySignature& key);

SemitoneSequence encode_semitones(const NoteGrid& grid, const KeySignature& key);

/// parse -> normalize -> encode.
SemitoneSequence semitones_from_abc(std::string_view text);

}  // namespace reelprint::abc
