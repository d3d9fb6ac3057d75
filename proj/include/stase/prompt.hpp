#pragma once

// Rule grammar for explicit spatial cues in a prompt, and the Description /
// Abstract routing decision built on it.
//
// Clause grammar (case-insensitive; clauses split on , ; . "and" "then"):
//   clause   := [filler] instrument-phrase? cue*
//   cue      := NUMBER angle-unit [tag] [left|right|above|below]
//             | NUMBER distance-unit
//             | [slightly|slight] direction-word
//   angle    := deg | degree(s) | U+00B0, tagged azimuth (default) or elevation
//   distance := m | meter(s) | metre(s) | ft | feet | foot  (feet x 0.3048)
// A clause with cues but no instrument continues the previous cue.
// Radian angles are recognised and rejected (they produce no cue).

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stase/error.hpp"
#include "stase/scene.hpp"
#include "stase/text.hpp"

namespace stase::prompt {

enum class Direction { Left, Right, Front, Behind, Above, Below, Center };

inline std::string to_string(Direction d) {
  switch (d) {
    case Direction::Left: return "left";
    case Direction::Right: return "right";
    case Direction::Front: return "front";
    case Direction::Behind: return "behind";
    case Direction::Above: return "above";
    case Direction::Below: return "below";
    case Direction::Center: return "center";
  }
  return "center";
}

inline std::optional<Direction> parse_direction(std::string_view w) {
  if (w == "left") return Direction::Left;
  if (w == "right") return Direction::Right;
  if (w == "front") return Direction::Front;
  if (w == "behind" || w == "back") return Direction::Behind;
  if (w == "above" || w == "overhead") return Direction::Above;
  if (w == "below" || w == "beneath") return Direction::Below;
  if (w == "center" || w == "centre" || w == "middle") return Direction::Center;
  return std::nullopt;
}

inline constexpr double kFeetToMetres = 0.3048;
inline constexpr double kSlightScale = 1.0 / 3.0;

/// Default azimuth for horizontal direction words (nullopt for vertical ones).
inline std::optional<double> direction_azimuth(Direction d) {
  switch (d) {
    case Direction::Left: return -90.0;
    case Direction::Right: return 90.0;
    case Direction::Front: return 0.0;
    case Direction::Behind: return 180.0;
    case Direction::Center: return 0.0;
    default: return std::nullopt;
  }
}

inline std::optional<double> direction_elevation(Direction d) {
  if (d == Direction::Above) return 45.0;
  if (d == Direction::Below) return -45.0;
  return std::nullopt;
}

struct ParsedCue {
  std::string instrument;
  std::optional<double> azimuth_deg;
  std::optional<double> elevation_deg;
  std::optional<double> distance_m;
  std::optional<Direction> direction_word;
  bool slight = false;

  bool has_cue() const {
    return azimuth_deg.has_value() || elevation_deg.has_value() || distance_m.has_value() ||
           direction_word.has_value();
  }

  /// Explicit azimuth, else the direction word's default (scaled by one
  /// third for "slightly" on left/right), else nullopt.
  std::optional<double> resolved_azimuth() const {
    if (azimuth_deg) return azimuth_deg;
    if (!direction_word) return std::nullopt;
    auto az = direction_azimuth(*direction_word);
    if (az && slight && (*direction_word == Direction::Left || *direction_word == Direction::Right))
      *az *= kSlightScale;
    return az;
  }

  std::optional<double> resolved_elevation() const {
    if (elevation_deg) return elevation_deg;
    if (!direction_word) return std::nullopt;
    auto el = direction_elevation(*direction_word);
    if (el && slight) *el *= kSlightScale;
    return el;
  }

  friend bool operator==(const ParsedCue&, const ParsedCue&) = default;
};

struct Description {
  std::vector<ParsedCue> cues;
};

struct Abstract {
  std::string query;
};

using PromptRoute = std::variant<Description, Abstract>;

namespace detail {

struct Token {
  enum Kind { Word, Number } kind;
  std::string text;
  double value = 0.0;
};

// Lowercases, maps the degree sign to " deg ", and splits into clauses.
// A '.' only ends a clause when it is not part of a number.
inline std::vector<std::vector<Token>> clauses(std::string_view raw) {
  std::string s;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto c = static_cast<unsigned char>(raw[i]);
    if (c == 0xC2 && i + 1 < raw.size() &&
        (static_cast<unsigned char>(raw[i + 1]) == 0xB0 || static_cast<unsigned char>(raw[i + 1]) == 0xBA)) {
      s += " deg ";
      ++i;
    } else {
      s.push_back(static_cast<char>(std::tolower(c)));
    }
  }

  std::vector<std::vector<Token>> out(1);
  auto is_digit = [&](std::size_t i) { return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); };
  auto is_alpha = [&](std::size_t i) {
    return i < s.size() && static_cast<unsigned char>(s[i]) < 0x80 && std::isalpha(static_cast<unsigned char>(s[i]));
  };
  auto end_clause = [&] {
    if (!out.back().empty()) out.emplace_back();
  };

  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    const bool prev_alnum = i > 0 && std::isalnum(static_cast<unsigned char>(s[i - 1]));
    const bool sign_start = (c == '-' || c == '+') && !prev_alnum && (is_digit(i + 1) || (s[i + 1] == '.' && is_digit(i + 2)));
    if (is_digit(i) || sign_start || (c == '.' && is_digit(i + 1) && !prev_alnum)) {
      std::size_t j = i + (sign_start ? 1 : 0);
      while (is_digit(j)) ++j;
      if (j < s.size() && s[j] == '.' && is_digit(j + 1)) {
        ++j;
        while (is_digit(j)) ++j;
      }
      const std::string num = s.substr(i, j - i);
      out.back().push_back({Token::Number, num, std::strtod(num.c_str(), nullptr)});
      i = j;
    } else if (is_alpha(i)) {
      std::size_t j = i;
      while (is_alpha(j)) ++j;
      std::string w = s.substr(i, j - i);
      if (w == "and" || w == "then") {
        end_clause();
      } else {
        out.back().push_back({Token::Word, std::move(w)});
      }
      i = j;
    } else {
      if (c == ',' || c == ';' || c == '.' || c == '!' || c == '?' || c == ':') end_clause();
      ++i;
    }
  }
  if (out.back().empty()) out.pop_back();
  return out;
}

inline bool is_angle_unit(const std::string& w) { return w == "deg" || w == "degree" || w == "degrees"; }
inline bool is_radian_unit(const std::string& w) {
  return w == "rad" || w == "rads" || w == "radian" || w == "radians";
}
inline std::optional<double> distance_scale(const std::string& w) {
  if (w == "m" || w == "meter" || w == "meters" || w == "metre" || w == "metres") return 1.0;
  if (w == "ft" || w == "feet" || w == "foot") return kFeetToMetres;
  return std::nullopt;
}
inline bool is_elevation_tag(const std::string& w) { return w == "elevation" || w == "elevated" || w == "height"; }
inline bool is_azimuth_tag(const std::string& w) { return w == "azimuth"; }

inline bool is_phrase_modifier(const std::string& w) {
  static const std::vector<std::string> mods = {
      "lead",  "rhythm", "backing", "acoustic", "electric", "grand", "main",  "solo",
      "steel", "nylon",  "clean",   "distorted", "fretless", "male", "female", "second", "first"};
  return std::find(mods.begin(), mods.end(), w) != mods.end();
}

inline bool is_filler(const std::string& w) {
  static const std::vector<std::string> filler = {
      "place", "put",  "position", "set",   "move", "pan",   "have", "with", "the",  "a",       "an",
      "my",    "our",  "let",      "lets",  "s",    "please", "keep", "bring", "make", "sit",  "sits",
      "at",    "to",   "on",       "in",    "is",   "are",   "of",   "from", "far",  "directly", "hard",
      "off",   "slightly", "slight", "should", "be", "about", "around", "roughly", "it", "them", "us"};
  return std::find(filler.begin(), filler.end(), w) != filler.end();
}

// Known instrument phrase: the first instrument noun plus adjacent
// modifiers on the left and further instrument nouns on the right.
inline std::optional<std::string> known_instrument(const std::vector<Token>& toks) {
  for (std::size_t k = 0; k < toks.size(); ++k) {
    if (toks[k].kind != Token::Word || !text::is_instrument_token(toks[k].text)) continue;
    std::size_t lo = k, hi = k + 1;
    while (lo > 0 && toks[lo - 1].kind == Token::Word && is_phrase_modifier(toks[lo - 1].text)) --lo;
    while (hi < toks.size() && toks[hi].kind == Token::Word && text::is_instrument_token(toks[hi].text)) ++hi;
    std::vector<std::string> words;
    for (std::size_t m = lo; m < hi; ++m) words.push_back(toks[m].text);
    return text::join(words, " ");
  }
  return std::nullopt;
}

// Unknown instrument: the words preceding the first cue token, with filler
// stripped from both ends. At most three words.
inline std::optional<std::string> verbatim_instrument(const std::vector<Token>& toks, std::size_t first_cue) {
  std::size_t lo = 0, hi = first_cue;
  while (lo < hi && toks[lo].kind == Token::Word && is_filler(toks[lo].text)) ++lo;
  while (hi > lo && toks[hi - 1].kind == Token::Word && is_filler(toks[hi - 1].text)) --hi;
  if (lo >= hi || hi - lo > 3) return std::nullopt;
  std::vector<std::string> words;
  for (std::size_t m = lo; m < hi; ++m) {
    if (toks[m].kind != Token::Word || parse_direction(toks[m].text)) return std::nullopt;
    words.push_back(toks[m].text);
  }
  return text::join(words, " ");
}

struct ClauseParse {
  std::optional<std::string> instrument;
  ParsedCue cue;
};

inline ClauseParse parse_clause(const std::vector<Token>& toks) {
  ClauseParse out;
  auto& cue = out.cue;
  std::optional<std::size_t> first_cue;
  auto mark = [&](std::size_t k) {
    if (!first_cue || k < *first_cue) first_cue = k;
  };
  auto word_at = [&](std::size_t k) -> const std::string* {
    return k < toks.size() && toks[k].kind == Token::Word ? &toks[k].text : nullptr;
  };

  std::vector<bool> consumed(toks.size(), false);
  for (std::size_t k = 0; k < toks.size(); ++k) {
    if (toks[k].kind != Token::Number) continue;
    const auto* unit = word_at(k + 1);
    if (unit == nullptr || !std::isfinite(toks[k].value)) continue;
    const double v = toks[k].value;

    if (is_radian_unit(*unit)) {
      consumed[k + 1] = true;
      continue;
    }
    if (auto scale = distance_scale(*unit)) {
      if (!cue.distance_m) cue.distance_m = v * *scale;
      consumed[k] = consumed[k + 1] = true;
      mark(k);
      continue;
    }
    if (!is_angle_unit(*unit)) continue;
    consumed[k] = consumed[k + 1] = true;
    mark(k);

    // Tag before ("azimuth of 45 deg", "elevation 30 deg") or after the unit.
    bool elevation = false;
    for (std::size_t back = 1; back <= 2 && back <= k; ++back)
      if (const auto* w = word_at(k - back); w && (is_elevation_tag(*w) || is_azimuth_tag(*w))) {
        elevation = is_elevation_tag(*w);
        consumed[k - back] = true;
        break;
      }
    std::size_t after = k + 2;
    if (const auto* w = word_at(after); w && (is_elevation_tag(*w) || is_azimuth_tag(*w))) {
      elevation = is_elevation_tag(*w);
      consumed[after] = true;
      ++after;
    }
    // Optional side word: "30 degrees to the left", "20 degrees above".
    std::size_t side = after;
    while (const auto* w = word_at(side)) {
      if (*w != "to" && *w != "the" && *w != "of") break;
      ++side;
    }
    double value = v;
    if (const auto* w = word_at(side)) {
      if (auto d = parse_direction(*w)) {
        if (*d == Direction::Left || *d == Direction::Right) {
          value = *d == Direction::Left ? -std::abs(v) : std::abs(v);
          consumed[side] = true;
        } else if (*d == Direction::Above || *d == Direction::Below) {
          elevation = true;
          value = *d == Direction::Below ? -std::abs(v) : std::abs(v);
          consumed[side] = true;
        }
      }
    }
    if (elevation) {
      if (!cue.elevation_deg) cue.elevation_deg = value;
    } else if (!cue.azimuth_deg) {
      cue.azimuth_deg = value;
    }
  }

  for (std::size_t k = 0; k < toks.size(); ++k) {
    if (consumed[k] || toks[k].kind != Token::Word) continue;
    const auto d = parse_direction(toks[k].text);
    if (!d) continue;
    if (!cue.direction_word) {
      cue.direction_word = d;
      // "slightly left", "slightly to the left"
      for (std::size_t back = 1; back <= 3 && back <= k; ++back) {
        const auto* w = word_at(k - back);
        if (w == nullptr) break;
        if (*w == "slightly" || *w == "slight") {
          cue.slight = true;
          break;
        }
        if (*w != "to" && *w != "the") break;
      }
    }
    mark(k);
  }

  if (!first_cue) return out;
  out.instrument = known_instrument(toks);
  // Unknown instrument words are only taken from clauses with a numeric
  // cue; a bare direction word needs a recognised instrument noun.
  const bool numeric = cue.azimuth_deg || cue.elevation_deg || cue.distance_m;
  if (!out.instrument && numeric) out.instrument = verbatim_instrument(toks, *first_cue);
  return out;
}

inline void fill_missing(ParsedCue& into, const ParsedCue& from) {
  if (!into.azimuth_deg) into.azimuth_deg = from.azimuth_deg;
  if (!into.elevation_deg) into.elevation_deg = from.elevation_deg;
  if (!into.distance_m) into.distance_m = from.distance_m;
  if (!into.direction_word) {
    into.direction_word = from.direction_word;
    into.slight = from.slight;
  }
}

}  // namespace detail

/// Extracts every explicit spatial cue. Unparseable clauses yield nothing.
inline std::vector<ParsedCue> parse_cues(std::string_view prompt) {
  std::vector<ParsedCue> cues;
  for (const auto& clause : detail::clauses(prompt)) {
    auto parsed = detail::parse_clause(clause);
    if (!parsed.cue.has_cue()) continue;
    if (parsed.instrument) {
      parsed.cue.instrument = *parsed.instrument;
      cues.push_back(std::move(parsed.cue));
    } else if (!cues.empty()) {
      detail::fill_missing(cues.back(), parsed.cue);
    }
  }
  return cues;
}

inline PromptRoute classify(std::string_view prompt) {
  if (text::trim(prompt).empty()) throw Error(ErrorCode::EmptyPrompt, "prompt is empty");
  auto cues = parse_cues(prompt);
  if (!cues.empty()) return Description{std::move(cues)};
  return Abstract{text::normalize_query(prompt)};
}

inline Json to_json(const ParsedCue& c) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"instrument", c.instrument},
              {"azimuth_deg", opt(c.azimuth_deg)},
              {"elevation_deg", opt(c.elevation_deg)},
              {"distance_m", opt(c.distance_m)},
              {"direction_word", c.direction_word ? Json(to_string(*c.direction_word)) : Json(nullptr)},
              {"slight", c.slight}};
}

}  // namespace stase::prompt
