#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "traitkit/error.hpp"

namespace traitkit {

// Big-Five traits: Extraversion, Agreeableness, Conscientiousness,
// Emotional Stability, Openness/Imagination.
enum class Trait { Ex = 0, Ag = 1, Co = 2, Es = 3, Op = 4 };

inline constexpr std::array<Trait, 5> kAllTraits = {Trait::Ex, Trait::Ag, Trait::Co,
                                                    Trait::Es, Trait::Op};

inline constexpr const char* to_string(Trait t) {
  switch (t) {
    case Trait::Ex: return "Ex";
    case Trait::Ag: return "Ag";
    case Trait::Co: return "Co";
    case Trait::Es: return "Es";
    case Trait::Op: return "Op";
  }
  return "?";
}

inline Trait trait_from_string(std::string_view s) {
  for (Trait t : kAllTraits) {
    if (s == to_string(t)) return t;
  }
  throw DataError("unknown trait '" + std::string(s) + "'");
}

inline std::size_t trait_index(Trait t) { return static_cast<std::size_t>(t); }

// H = strictly above the cohort median, L otherwise.
enum class Label { H = 0, L = 1 };

inline constexpr const char* to_string(Label l) { return l == Label::H ? "H" : "L"; }

inline Label label_from_string(std::string_view s) {
  if (s == "H") return Label::H;
  if (s == "L") return Label::L;
  throw DataError("unknown class label '" + std::string(s) + "' (expected H or L)");
}

struct TraitScores {
  std::array<int, 5> values{};  // indexed by trait_index

  int& operator[](Trait t) { return values[trait_index(t)]; }
  int operator[](Trait t) const { return values[trait_index(t)]; }
  bool operator==(const TraitScores&) const = default;
};

struct TraitLabels {
  std::array<Label, 5> values{};

  Label& operator[](Trait t) { return values[trait_index(t)]; }
  Label operator[](Trait t) const { return values[trait_index(t)]; }
  bool operator==(const TraitLabels&) const = default;
};

}  // namespace traitkit
