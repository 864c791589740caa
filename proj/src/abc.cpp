#include "reelprint/abc.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <utility>

namespace reelprint::abc {

Fraction::Fraction(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_note_letter(char c) { return (c >= 'A' && c <= 'G') || (c >= 'a' && c <= 'g'); }

int natural_semitone(char upper) {
  switch (upper) {
    case 'C': return 0;
    case 'D': return 2;
    case 'E': return 4;
    case 'F': return 5;
    case 'G': return 7;
    case 'A': return 9;
    case 'B': return 11;
    default: return 0;
  }
}

Fraction parse_fraction_field(const std::string& text, int line) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Fraction(std::stoll(text), 1);
    const auto num = std::stoll(text.substr(0, slash));
    const auto den = std::stoll(text.substr(slash + 1));
    if (num <= 0 || den <= 0) throw std::invalid_argument("non-positive");
    return Fraction(num, den);
  } catch (const std::logic_error&) {
    throw AbcError(AbcErrc::UnparsableToken, "cannot parse fraction '" + text + "'", line, 1);
  }
}

Fraction parse_meter(const std::string& text, int line) {
  if (text == "C") return {4, 4};
  if (text == "C|") return {2, 2};
  return parse_fraction_field(text, line);
}

/// Lexer for the tune body. Keeps bar and tuplet state across lines.
class BodyLexer {
 public:
  explicit BodyLexer(TuneScore& score) : score_(score) {}

  void feed_line(std::string_view text, int line) {
    line_ = line;
    text_ = text;
    pos_ = 0;
    while (pos_ < text_.size()) step();
  }

  void finish() {
    if (!current_.tokens.empty()) push_bar();
    if (pending_end_repeat_ && !score_.bars.empty()) score_.bars.back().ends_repeat = true;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    throw AbcError(AbcErrc::UnparsableToken, what + " at line " + std::to_string(line_) + ", column " +
                                                 std::to_string(at + 1),
                   line_, static_cast<int>(at + 1));
  }

  char peek(std::size_t offset = 0) const { return pos_ + offset < text_.size() ? text_[pos_ + offset] : '\0'; }

  void skip_until(char close, const char* what) {
    const std::size_t start = pos_;
    const auto end = text_.find(close, pos_ + 1);
    if (end == std::string_view::npos) fail(std::string("unterminated ") + what, start);
    pos_ = end + 1;
  }

  void step() {
    const char c = peek();
    if (std::isspace(static_cast<unsigned char>(c)) || c == '\\') {
      ++pos_;
    } else if (c == '%') {
      pos_ = text_.size();
    } else if (c == '"') {
      skip_until('"', "chord symbol");
    } else if (c == '!') {
      skip_until('!', "decoration");
    } else if (c == '+') {
      skip_until('+', "decoration");
    } else if (c == '{') {
      skip_until('}', "grace-note group");
    } else if (c == '~' || c == '.' || c == 'H' || c == 'L' || c == 'M' || c == 'O' || c == 'P' || c == 'S' ||
               c == 'T' || c == 'u' || c == 'v' || c == 'y' || c == ')' || c == '>' || c == '<') {
      ++pos_;
    } else if (c == '(') {
      if (std::isdigit(static_cast<unsigned char>(peek(1)))) {
        if (peek(1) != '3' || std::isdigit(static_cast<unsigned char>(peek(2))) || peek(2) == ':')
          fail("unsupported tuplet", pos_);
        triplet_remaining_ = 3;
        pos_ += 2;
      } else {
        ++pos_;  // slur
      }
    } else if (c == '-') {
      if (NoteToken* last = last_token()) last->tied_to_next = true;
      ++pos_;
    } else if (c == '^' || c == '_' || c == '=' || is_note_letter(c)) {
      add_token(read_note());
    } else if (c == 'z' || c == 'x') {
      NoteToken rest;
      rest.kind = TokenKind::Rest;
      rest.line = line_;
      rest.column = static_cast<int>(pos_ + 1);
      ++pos_;
      rest.length = read_length();
      add_token(rest);
    } else if (c == '[') {
      const char next = peek(1);
      if (next == '|') {
        read_bar_line();
      } else if (std::isdigit(static_cast<unsigned char>(next))) {
        ++pos_;
        pending_ending_ = read_int();
      } else if (std::isalpha(static_cast<unsigned char>(next)) && peek(2) == ':') {
        fail("inline field changes are not supported", pos_);
      } else {
        read_chord();
      }
    } else if (c == '|' || c == ':') {
      read_bar_line();
    } else {
      fail(std::string("unexpected character '") + c + "'", pos_);
    }
  }

  int read_int() {
    int v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) v = v * 10 + (text_[pos_++] - '0');
    return v;
  }

  Fraction read_length() {
    std::int64_t num = 1, den = 1;
    if (std::isdigit(static_cast<unsigned char>(peek()))) num = read_int();
    while (peek() == '/') {
      ++pos_;
      if (std::isdigit(static_cast<unsigned char>(peek()))) den *= read_int();
      else den *= 2;
    }
    if (num == 0) fail("zero-length note", pos_);
    return Fraction(num, den);
  }

  NoteToken read_note() {
    NoteToken note;
    note.line = line_;
    note.column = static_cast<int>(pos_ + 1);
    if (peek() == '^') {
      note.accidental = peek(1) == '^' ? Accidental::DoubleSharp : Accidental::Sharp;
      pos_ += peek(1) == '^' ? 2 : 1;
    } else if (peek() == '_') {
      note.accidental = peek(1) == '_' ? Accidental::DoubleFlat : Accidental::Flat;
      pos_ += peek(1) == '_' ? 2 : 1;
    } else if (peek() == '=') {
      note.accidental = Accidental::Natural;
      ++pos_;
    }
    if (!is_note_letter(peek())) fail("accidental without a note", pos_);
    note.letter = text_[pos_++];
    while (peek() == '\'' || peek() == ',') note.octave_marks += text_[pos_++] == '\'' ? 1 : -1;
    note.length = read_length();
    return note;
  }

  void read_chord() {
    const std::size_t start = pos_;
    ++pos_;
    std::optional<NoteToken> first;
    while (peek() != ']') {
      if (peek() == '\0') fail("unterminated chord", start);
      if (std::isspace(static_cast<unsigned char>(peek()))) {
        ++pos_;
        continue;
      }
      if (!(peek() == '^' || peek() == '_' || peek() == '=' || is_note_letter(peek())))
        fail(std::string("unexpected character '") + peek() + "' in chord", pos_);
      NoteToken n = read_note();
      if (!first) first = n;
    }
    ++pos_;
    if (!first) fail("empty chord", start);
    first->length = first->length * read_length();
    add_token(*first);
  }

  void read_bar_line() {
    const std::size_t start = pos_;
    std::string mark;
    while (peek() == '|' || peek() == ':' || peek() == ']' || (peek() == '[' && peek(1) == '|'))
      mark.push_back(text_[pos_++]);
    if (mark.find('|') == std::string::npos && mark != "::") fail("stray ':'", start);
    const auto first_bar = mark.find('|');
    const auto last_bar = mark.rfind('|');
    const bool ends = mark == "::" || (first_bar != std::string::npos && mark.find(':') < first_bar);
    const bool starts = mark == "::" || (last_bar != std::string::npos && mark.find(':', last_bar) != std::string::npos);
    int ending = 0;
    if (std::isdigit(static_cast<unsigned char>(peek()))) ending = read_int();

    if (!current_.tokens.empty()) {
      current_.ends_repeat = current_.ends_repeat || ends;
      push_bar();
    } else if (ends) {
      if (!score_.bars.empty()) {
        score_.bars.back().ends_repeat = true;
        score_.repeat_markers.push_back({score_.bars.size() - 1, RepeatKind::End, 0});
      } else {
        pending_end_repeat_ = true;
      }
    }
    if (starts) pending_start_ = true;
    if (ending > 0) pending_ending_ = ending;
  }

  NoteToken* last_token() {
    if (!current_.tokens.empty()) return &current_.tokens.back();
    if (!score_.bars.empty() && !score_.bars.back().tokens.empty()) return &score_.bars.back().tokens.back();
    return nullptr;
  }

  void add_token(NoteToken token) {
    if (current_.tokens.empty()) {
      if (pending_start_) {
        current_.starts_repeat = true;
        score_.repeat_markers.push_back({score_.bars.size(), RepeatKind::Start, 0});
      }
      if (pending_ending_ > 0) {
        current_.ending = pending_ending_;
        score_.repeat_markers.push_back({score_.bars.size(), RepeatKind::Ending, pending_ending_});
      }
      pending_start_ = false;
      pending_ending_ = 0;
    }
    if (triplet_remaining_ > 0) {
      token.triplet_position = 4 - triplet_remaining_;
      --triplet_remaining_;
    }
    current_.tokens.push_back(token);
  }

  void push_bar() {
    if (current_.ends_repeat) score_.repeat_markers.push_back({score_.bars.size(), RepeatKind::End, 0});
    score_.bars.push_back(std::move(current_));
    current_ = Bar{};
  }

  TuneScore& score_;
  Bar current_;
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 0;
  int triplet_remaining_ = 0;
  int pending_ending_ = 0;
  bool pending_start_ = false;
  bool pending_end_repeat_ = false;
};

bool looks_like_field(std::string_view line) {
  return line.size() >= 2 && std::isalpha(static_cast<unsigned char>(line[0])) && line[1] == ':' &&
         (line.size() == 2 || (line[2] != '|' && line[2] != ':'));
}

}  // namespace

int KeySignature::shift(char letter) const {
  const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
  if (sharpened.count(up)) return 1;
  if (flattened.count(up)) return -1;
  return 0;
}

int KeySignature::fifths() const {
  return static_cast<int>(sharpened.size()) - static_cast<int>(flattened.size());
}

KeySignature parse_key(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty() || !std::isalpha(static_cast<unsigned char>(t[0])))
    throw AbcError(AbcErrc::UnparsableToken, "cannot parse key '" + t + "'");
  KeySignature key;
  key.tonic = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
  if (key.tonic < 'A' || key.tonic > 'G') throw AbcError(AbcErrc::UnparsableToken, "bad key tonic '" + t + "'");
  std::size_t i = 1;
  if (i < t.size() && (t[i] == '#' || t[i] == 'b')) {
    key.tonic_accidental = t[i] == '#' ? 1 : -1;
    ++i;
  }
  std::string mode;
  for (; i < t.size(); ++i)
    if (!std::isspace(static_cast<unsigned char>(t[i]))) mode.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(t[i]))));

  static const std::map<std::string, Mode> modes = {
      {"", Mode::Major},         {"maj", Mode::Major},     {"major", Mode::Major},
      {"ion", Mode::Major},      {"ionian", Mode::Major},  {"m", Mode::Minor},
      {"min", Mode::Minor},      {"minor", Mode::Minor},   {"aeo", Mode::Minor},
      {"aeolian", Mode::Minor},  {"dor", Mode::Dorian},    {"dorian", Mode::Dorian},
      {"mix", Mode::Mixolydian}, {"mixolydian", Mode::Mixolydian}};
  const auto found = modes.find(mode);
  if (found == modes.end()) throw AbcError(AbcErrc::UnparsableToken, "unsupported mode in key '" + t + "'");
  key.mode = found->second;

  // Position of the tonic on the circle of fifths as a major key.
  static const std::map<char, int> major_fifths = {{'C', 0}, {'G', 1}, {'D', 2}, {'A', 3},
                                                   {'E', 4}, {'B', 5}, {'F', -1}};
  int fifths = major_fifths.at(key.tonic) + 7 * key.tonic_accidental;
  switch (key.mode) {
    case Mode::Major: break;
    case Mode::Minor: fifths -= 3; break;
    case Mode::Dorian: fifths -= 2; break;
    case Mode::Mixolydian: fifths -= 1; break;
  }
  if (fifths < -7 || fifths > 7) throw AbcError(AbcErrc::UnparsableToken, "key '" + t + "' has no standard signature");
  static constexpr std::string_view sharp_order = "FCGDAEB";
  static constexpr std::string_view flat_order = "BEADGCF";
  for (int k = 0; k < fifths; ++k) key.sharpened.insert(sharp_order[static_cast<std::size_t>(k)]);
  for (int k = 0; k < -fifths; ++k) key.flattened.insert(flat_order[static_cast<std::size_t>(k)]);
  return key;
}

TuneScore parse_abc(std::string_view text) {
  if (trim(text).empty()) throw AbcError(AbcErrc::MissingHeaderField, "empty ABC text");
  TuneScore score;
  BodyLexer lexer(score);
  bool have_key = false, have_meter = false, have_length = false;

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    ++line_no;
    start = end + 1;

    const std::string line = trim(raw);
    if (line.empty() || line[0] == '%') {
      if (end == text.size()) break;
      continue;
    }
    if (looks_like_field(line)) {
      const char field = line[0];
      const std::string value = trim(std::string_view(line).substr(2));
      if (have_key) {
        if (field == 'K' || field == 'M' || field == 'L')
          throw AbcError(AbcErrc::UnparsableToken,
                         "mid-tune " + std::string(1, field) + ": change at line " + std::to_string(line_no), line_no, 1);
      } else {
        switch (field) {
          case 'X':
            try { score.index = std::stoi(value); } catch (const std::logic_error&) { score.index = 0; }
            break;
          case 'T':
            if (score.title.empty()) score.title = value;
            break;
          case 'R': score.rhythm = lower(value); break;
          case 'M': score.meter = parse_meter(value, line_no); have_meter = true; break;
          case 'L': score.unit_length = parse_fraction_field(value, line_no); have_length = true; break;
          case 'K':
            try {
              score.key = parse_key(value);
            } catch (const AbcError& e) {
              throw AbcError(e.code(), e.what(), line_no, 3);
            }
            have_key = true;
            break;
          default: break;
        }
      }
    } else if (!have_key) {
      throw AbcError(AbcErrc::MissingHeaderField, "tune body at line " + std::to_string(line_no) + " precedes the K: field",
                     line_no, 1);
    } else {
      // Column numbers refer to the untrimmed line.
      lexer.feed_line(raw, line_no);
    }
    if (end == text.size()) break;
  }
  if (!have_key) throw AbcError(AbcErrc::MissingHeaderField, "missing K: field");
  if (!have_meter) throw AbcError(AbcErrc::MissingHeaderField, "missing M: field");
  if (!have_length) score.unit_length = score.meter.value() < 0.75 ? Fraction(1, 16) : Fraction(1, 8);
  lexer.finish();
  return score;
}

namespace {

/// Bars actually played in one pass: non-final endings removed, trailing
/// post-repeat tags and an anacrusis dropped.
std::vector<const Bar*> play_through(const TuneScore& score, const Fraction& slot_scale) {
  const auto& bars = score.bars;
  auto bar_slots = [&](const Bar& bar) {
    Fraction total{0};
    for (const auto& t : bar.tokens) total = total + t.length * slot_scale;
    return total;
  };

  std::vector<const Bar*> played;
  std::size_t last_end_repeat = bars.size();
  for (std::size_t i = 0; i < bars.size();) {
    if (bars[i].ending > 0) {
      std::size_t j = i;
      while (j < bars.size() && !bars[j].ends_repeat) ++j;
      if (j + 1 < bars.size() && bars[j + 1].ending > bars[i].ending) {
        i = j + 1;  // an earlier ending; the later one is the one played through
        continue;
      }
    }
    if (bars[i].ends_repeat) last_end_repeat = played.size();
    played.push_back(&bars[i]);
    ++i;
  }

  // Tag after the final repeat sign, shorter than half a 16-bar reel.
  if (last_end_repeat + 1 < played.size()) {
    Fraction trailing{0};
    for (std::size_t i = last_end_repeat + 1; i < played.size(); ++i) trailing = trailing + bar_slots(*played[i]);
    if (trailing < Fraction(64)) played.resize(last_end_repeat + 1);
  }

  const Fraction full_bar = score.meter / Fraction(1, 8);
  if (played.size() > 1 && bar_slots(*played.front()) < full_bar) played.erase(played.begin());
  return played;
}

}  // namespace

NoteGrid normalize_to_grid(const TuneScore& score) {
  if (!score.rhythm.empty() && score.rhythm.find("reel") == std::string::npos)
    throw AbcError(AbcErrc::UnsupportedRhythm, "unsupported rhythm '" + score.rhythm + "'");
  if (!(score.meter == Fraction(4, 4)))
    throw AbcError(AbcErrc::UnsupportedRhythm,
                   "unsupported meter " + std::to_string(score.meter.num) + "/" + std::to_string(score.meter.den));

  // Slot = one eighth note.
  const Fraction slot_scale = score.unit_length / Fraction(1, 8);
  const auto played = play_through(score, slot_scale);

  struct Event {
    Fraction start, end;
    std::optional<Pitch> pitch;
  };
  std::vector<Event> events;
  Fraction t{0};
  for (const Bar* bar : played) {
    std::map<std::pair<char, int>, Accidental> carried;
    auto resolve = [&](const NoteToken& tok) -> std::optional<Pitch> {
      if (tok.kind == TokenKind::Rest) return std::nullopt;
      Pitch p{tok.letter, tok.octave_marks, tok.accidental};
      const auto key = std::make_pair(tok.letter, tok.octave_marks);
      if (tok.accidental) carried[key] = *tok.accidental;
      else if (auto it = carried.find(key); it != carried.end()) p.accidental = it->second;
      return p;
    };
    const auto& toks = bar->tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const NoteToken& tok = toks[i];
      if (tok.triplet_position == 1 && i + 2 < toks.size() && toks[i + 2].triplet_position == 3) {
        // Three notes in the time of two; the middle one is dropped.
        const Fraction total = (tok.length + toks[i + 1].length + toks[i + 2].length) * slot_scale * Fraction(2, 3);
        const Fraction half = total / Fraction(2);
        auto first = resolve(tok);
        resolve(toks[i + 1]);
        auto third = resolve(toks[i + 2]);
        events.push_back({t, t + half, first});
        events.push_back({t + half, t + total, third});
        t = t + total;
        i += 2;
        continue;
      }
      const Fraction len = tok.length * slot_scale;
      events.push_back({t, t + len, resolve(tok)});
      t = t + len;
    }
  }

  // A slot takes whatever sounds at its start.
  std::vector<std::optional<Pitch>> slots;
  for (const auto& e : events) {
    auto k = (e.start.num + e.start.den - 1) / e.start.den;
    for (; Fraction(k) < e.end; ++k) slots.push_back(e.pitch);
  }
  if (slots.size() != kGridSlots)
    throw AbcError(AbcErrc::WrongSlotCount,
                   "normalized tune has " + std::to_string(slots.size()) + " slots, expected 128");
  NoteGrid grid;
  std::copy(slots.begin(), slots.end(), grid.slots.begin());
  return grid;
}

int encode_pitch(const Pitch& pitch, const KeySignature& key) {
  const bool lower_octave = std::islower(static_cast<unsigned char>(pitch.letter)) != 0;
  const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(pitch.letter)));
  int n = natural_semitone(up) + (lower_octave ? 12 : 0) + 12 * pitch.octave_marks;
  n += pitch.accidental ? static_cast<int>(*pitch.accidental) : key.shift(up);
  if (n < kMinSemitone || n > kMaxSemitone)
    throw AbcError(AbcErrc::OutOfRangePitch, "pitch " + std::to_string(n) + " semitones is out of range");
  return n;
}

SemitoneSequence encode_semitones(const NoteGrid& grid, const KeySignature& key) {
  SemitoneSequence seq;
  for (std::size_t i = 0; i < kGridSlots; ++i)
    if (grid.slots[i]) seq.values[i] = encode_pitch(*grid.slots[i], key);
  return seq;
}

SemitoneSequence semitones_from_abc(std::string_view text) {
  const TuneScore score = parse_abc(text);
  return encode_semitones(normalize_to_grid(score), score.key);
}

}  // namespace reelprint::abc
