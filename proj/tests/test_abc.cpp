#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "reelprint/abc.hpp"
#include "support.hpp"

using namespace reelprint::abc;

namespace {

std::string read_text(const std::string& name) {
  std::ifstream in(testing::data_path(name));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string header(const std::string& key = "Cmaj") {
  return "X:1\nT:Test\nR:reel\nM:4/4\nL:1/8\nK:" + key + "\n";
}

std::string repeat_bar(const std::string& bar, int times) {
  std::string out;
  for (int i = 0; i < times; ++i) out += bar + "|";
  return out + "\n";
}

std::vector<std::string> letters(const NoteGrid& g, std::size_t first, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = first; i < first + count; ++i) {
    if (!g.slots[i]) {
      out.push_back("z");
      continue;
    }
    std::string s(1, g.slots[i]->letter);
    for (int k = 0; k < g.slots[i]->octave_marks; ++k) s += '\'';
    for (int k = 0; k > g.slots[i]->octave_marks; --k) s += ',';
    out.push_back(s);
  }
  return out;
}

using Strings = std::vector<std::string>;

}  // namespace

TEST_SUITE("abc") {
  TEST_CASE("Galway Rambler header and bars") {
    const TuneScore s = parse_abc(read_text("galway_rambler.abc"));
    CHECK(s.title == "The Galway Rambler");
    CHECK(s.rhythm == "reel");
    CHECK(s.meter == Fraction(4, 4));
    CHECK(s.unit_length == Fraction(1, 8));
    CHECK(s.key.tonic == 'G');
    CHECK(s.key.mode == Mode::Major);
    CHECK(s.bars.size() == 16);
  }

  TEST_CASE("Galway Rambler normalizes to 128 slots") {
    const NoteGrid g = normalize_to_grid(parse_abc(read_text("galway_rambler.abc")));
    CHECK(letters(g, 0, 8) == Strings{"G", "G", "d", "G", "e", "G", "d", "G"});
    // bar 11: g3 b a2ab
    CHECK(letters(g, 80, 8) == Strings{"g", "g", "g", "b", "a", "a", "a", "b"});
    // bar 15: bgag (3efg fa
    CHECK(letters(g, 112, 8) == Strings{"b", "g", "a", "g", "e", "g", "f", "a"});
  }

  TEST_CASE("uniform body") {
    const TuneScore s = parse_abc("X:1\nM:4/4\nL:1/8\nK:Cmaj\n" + repeat_bar("CCCCCCCC", 16));
    REQUIRE(s.bars.size() == 16);
    for (const auto& b : s.bars) {
      REQUIRE(b.tokens.size() == 8);
      for (const auto& t : b.tokens) CHECK(t.letter == 'C');
    }
  }

  TEST_CASE("missing header fields") {
    CHECK_THROWS_AS(parse_abc("X:1\nM:4/4\nCDEF GABc|\nK:C\n"), AbcError);
    try {
      parse_abc("X:1\nM:4/4\nCDEF GABc|\nK:C\n");
    } catch (const AbcError& e) {
      CHECK(e.code() == AbcErrc::MissingHeaderField);
      CHECK(e.line() == 3);
    }
    try {
      parse_abc("X:1\nL:1/8\nK:C\nCDEF GABc|\n");
      FAIL("expected an error");
    } catch (const AbcError& e) {
      CHECK(e.code() == AbcErrc::MissingHeaderField);
    }
    try {
      parse_abc("X:1\nM:4/4\nL:1/8\n");
      FAIL("expected an error");
    } catch (const AbcError& e) {
      CHECK(e.code() == AbcErrc::MissingHeaderField);
    }
  }

  TEST_CASE("unparsable tokens report line and column") {
    try {
      parse_abc(header() + "CDEF GA#c|\n");
      FAIL("expected an error");
    } catch (const AbcError& e) {
      CHECK(e.code() == AbcErrc::UnparsableToken);
      CHECK(e.line() == 7);
      CHECK(e.column() == 8);
    }
    try {
      parse_abc(header() + "CDEF GABc|\nK:G\nCDEF GABc|\n");
      FAIL("expected an error");
    } catch (const AbcError& e) {
      CHECK(e.code() == AbcErrc::UnparsableToken);
    }
    CHECK_THROWS_AS(parse_abc(header() + "CDEF [K:G] GABc|\n"), AbcError);
  }

  TEST_CASE("ornaments, grace notes, chords and slurs are dropped") {
    const std::string plain = header("G") + repeat_bar("GABc dedB", 16);
    const std::string busy = header("G") + repeat_bar("\"G\"~G{A}AB!trill!c (ded)B", 16);
    const NoteGrid a = normalize_to_grid(parse_abc(plain));
    const NoteGrid b = normalize_to_grid(parse_abc(busy));
    CHECK(letters(a, 0, 128) == letters(b, 0, 128));
  }

  TEST_CASE("long notes and triplets") {
    const NoteGrid g = normalize_to_grid(parse_abc(header("G") + "g3 b a2ab|(3efg fa (3GGG dG|" +
                                                   repeat_bar("GABc dedB", 14)));
    CHECK(letters(g, 0, 8) == Strings{"g", "g", "g", "b", "a", "a", "a", "b"});
    CHECK(letters(g, 8, 8) == Strings{"e", "g", "f", "a", "G", "G", "d", "G"});
  }

  TEST_CASE("double reel is played once per part") {
    // Hand expansion: 8 bars of A then 8 bars of B, 16 x 8 = 128 slots.
    const std::string a = "|:" + repeat_bar("CDEF GABc", 7) + "cBAG FEDC:|\n";
    const std::string b = "|:" + repeat_bar("cdef gabc'", 7) + "c'bag fedc:|\n";
    const NoteGrid g = normalize_to_grid(parse_abc(header() + a + b));
    CHECK(letters(g, 56, 8) == Strings{"c", "B", "A", "G", "F", "E", "D", "C"});
    CHECK(letters(g, 64, 8) == Strings{"c", "d", "e", "f", "g", "a", "b", "c'"});
    CHECK(letters(g, 120, 8) == Strings{"c'", "b", "a", "g", "f", "e", "d", "c"});
  }

  TEST_CASE("first and second endings keep the last ending") {
    std::string a = "|:";
    for (int i = 0; i < 7; ++i) a += "CDEF GABc|";
    a += "1 CCCC CCCC:|2 DDDD DDDD||\n";
    const NoteGrid g = normalize_to_grid(parse_abc(header() + a + repeat_bar("cdef gabc", 8)));
    CHECK(letters(g, 56, 8) == Strings(8, "D"));
  }

  TEST_CASE("trailing tag after the last repeat is dropped") {
    const std::string body = "|:" + repeat_bar("CDEF GABc", 8) + ":|\n|:" + repeat_bar("cdef gabc", 8) + ":|\nD4 D4|]";
    CHECK_NOTHROW(normalize_to_grid(parse_abc(header() + body)));
  }

  TEST_CASE("anacrusis is dropped") {
    const NoteGrid g = normalize_to_grid(parse_abc(header() + "A|" + repeat_bar("CDEF GABc", 16)));
    CHECK(letters(g, 0, 2) == Strings{"C", "D"});
  }

  TEST_CASE("slot count errors") {
    try {
      normalize_to_grid(parse_abc(header() + repeat_bar("CDEF GABc", 15)));
      FAIL("expected an error");
    } catch (const AbcError& e) {
      CHECK(e.code() == AbcErrc::WrongSlotCount);
      CHECK(std::string(e.what()).find("120") != std::string::npos);
    }
    // A one-point-five reel: A part once, B part repeated in full.
    const std::string abb = repeat_bar("CDEF GABc", 8) + repeat_bar("cdef gabc", 8) + repeat_bar("cdef gabc", 8);
    CHECK_THROWS_AS(normalize_to_grid(parse_abc(header() + abb)), AbcError);
  }

  TEST_CASE("unsupported rhythms and meters") {
    const std::string jig = "X:1\nT:J\nR:jig\nM:6/8\nL:1/8\nK:D\nDFA DFA|\n";
    try {
      normalize_to_grid(parse_abc(jig));
      FAIL("expected an error");
    } catch (const AbcError& e) {
      CHECK(e.code() == AbcErrc::UnsupportedRhythm);
    }
    const std::string reel_in_3 = "X:1\nT:J\nR:reel\nM:3/4\nL:1/8\nK:D\nDFA DFA|\n";
    CHECK_THROWS_AS(normalize_to_grid(parse_abc(reel_in_3)), AbcError);
  }

  TEST_CASE("key signatures follow the circle of fifths") {
    CHECK(parse_key("Gmaj").sharpened == std::set<char>{'F'});
    CHECK(parse_key("D").sharpened == std::set<char>{'F', 'C'});
    CHECK(parse_key("Edor").sharpened == std::set<char>{'F', 'C'});
    CHECK(parse_key("Ador").sharpened == std::set<char>{'F'});
    CHECK(parse_key("Amix").sharpened == std::set<char>{'F', 'C'});
    CHECK(parse_key("Em").sharpened == std::set<char>{'F'});
    CHECK(parse_key("Bm").sharpened == std::set<char>{'F', 'C'});
    CHECK(parse_key("Dm").flattened == std::set<char>{'B'});
    CHECK(parse_key("F").flattened == std::set<char>{'B'});
    CHECK(parse_key("Bb").flattened == std::set<char>{'B', 'E'});
    CHECK(parse_key("Gmixolydian").fifths() == 0);
    CHECK(parse_key("F#m").fifths() == 3);
    CHECK(parse_key("C").fifths() == 0);
    CHECK_THROWS_AS(parse_key("Hmaj"), AbcError);
    CHECK_THROWS_AS(parse_key("Glydian"), AbcError);
  }

  TEST_CASE("pitch encoding table") {
    const KeySignature c = parse_key("C");
    const char* naturals = "CDEFGABcdefgab";
    const int expected[] = {0, 2, 4, 5, 7, 9, 11, 12, 14, 16, 17, 19, 21, 23};
    for (int i = 0; i < 14; ++i) CHECK(encode_pitch({naturals[i], 0, std::nullopt}, c) == expected[i]);
    CHECK(encode_pitch({'a', 0, std::nullopt}, c) == 21);
    CHECK(encode_pitch({'f', 0, std::nullopt}, parse_key("Gmaj")) == 18);
    CHECK(encode_pitch({'c', 1, std::nullopt}, c) == 24);
    CHECK(encode_pitch({'C', -1, std::nullopt}, c) == -12);
    CHECK(encode_pitch({'F', 0, Accidental::Sharp}, c) == 6);
    CHECK(encode_pitch({'f', 0, Accidental::Natural}, parse_key("G")) == 17);
    CHECK(encode_pitch({'B', 0, std::nullopt}, parse_key("F")) == 10);
    CHECK(encode_pitch({'c', 3, std::nullopt}, c) == kMaxSemitone);
    CHECK_THROWS_AS(encode_pitch({'d', 3, std::nullopt}, c), AbcError);
    CHECK_THROWS_AS(encode_pitch({'C', -3, std::nullopt}, c), AbcError);
  }

  TEST_CASE("octave marks shift by twelve for every pitch and key") {
    const char* keys[] = {"C", "G", "D", "A", "F", "Bb", "Em", "Edor", "Amix", "Bm"};
    const std::optional<Accidental> accs[] = {std::nullopt, Accidental::Sharp, Accidental::Flat,
                                              Accidental::Natural};
    for (const char* k : keys) {
      const KeySignature key = parse_key(k);
      for (char letter : std::string("CDEFGABcdefgab"))
        for (const auto& acc : accs) {
          const int base = encode_pitch({letter, 0, acc}, key);
          CHECK(encode_pitch({letter, 1, acc}, key) == base + 12);
          CHECK(encode_pitch({letter, -1, acc}, key) == base - 12);
        }
    }
  }

  TEST_CASE("inline accidentals last until the bar line") {
    const std::string tune = header("Edor") + "e^gfe =g2 fg|g8|" + repeat_bar("EBBA B2EB", 14);
    const SemitoneSequence s = semitones_from_abc(tune);
    const int expected[] = {16, 20, 18, 16, 19, 19, 18, 19};
    for (int i = 0; i < 8; ++i) CHECK(s.values[static_cast<std::size_t>(i)] == expected[i]);
    // Next bar: back to the key signature (g natural in E dorian).
    CHECK(s.values[8] == 19);

    const SemitoneSequence t = semitones_from_abc(header("C") + "^FGFF ^fF_BB|" + repeat_bar("CDEF GABc", 15));
    const int expected_t[] = {6, 7, 6, 6, 18, 6, 10, 10};
    for (int i = 0; i < 8; ++i) CHECK(t.values[static_cast<std::size_t>(i)] == expected_t[i]);
  }

  TEST_CASE("rests are absent values") {
    const SemitoneSequence s = semitones_from_abc(header() + "CDEF z2 Gz|" + repeat_bar("CDEF GABc", 15));
    CHECK(s.values[3] == 5);
    CHECK_FALSE(s.values[4].has_value());
    CHECK_FALSE(s.values[5].has_value());
    CHECK(s.values[6] == 7);
    CHECK_FALSE(s.values[7].has_value());
  }

  TEST_CASE("unit length other than an eighth") {
    const std::string sixteenths = "X:1\nR:reel\nM:4/4\nL:1/16\nK:C\n" + repeat_bar("C2D2E2F2 G2A2B2c2", 16);
    const std::string eighths = header() + repeat_bar("CDEF GABc", 16);
    CHECK(semitones_from_abc(sixteenths).values == semitones_from_abc(eighths).values);
  }

  TEST_CASE("encoding is deterministic and in range") {
    std::mt19937_64 rng(11);
    const std::string alphabet = "CDEFGABcdefgab";
    for (int trial = 0; trial < 50; ++trial) {
      std::string body;
      for (int bar = 0; bar < 16; ++bar) {
        for (int k = 0; k < 8; ++k) body += alphabet[rng() % alphabet.size()];
        body += "|";
      }
      const std::string tune = header(rng() % 2 ? "G" : "Edor") + body + "\n";
      const TuneScore score = parse_abc(tune);
      const NoteGrid grid = normalize_to_grid(score);
      const SemitoneSequence a = encode_semitones(grid, score.key);
      const SemitoneSequence b = encode_semitones(grid, score.key);
      CHECK(a.values == b.values);
      for (const auto& v : a.values) {
        REQUIRE(v.has_value());
        CHECK(*v >= kMinSemitone);
        CHECK(*v <= kMaxSemitone);
      }
    }
  }
}
