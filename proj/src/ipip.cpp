#include "traitkit/ipip.hpp"

#include <algorithm>

#include "traitkit/csv.hpp"
#include "traitkit/error.hpp"

namespace traitkit::ipip {

void validate_keys(const ItemKeySet& keys) {
  if (keys.size() != 50) {
    throw DataError("item keys: expected 50 items, got " + std::to_string(keys.size()));
  }
  std::array<bool, 50> seen{};
  std::array<int, 5> per_trait{};
  for (const auto& key : keys) {
    if (key.id < 1 || key.id > 50) {
      throw DataError("item keys: id " + std::to_string(key.id) + " out of range 1..50");
    }
    if (seen[static_cast<std::size_t>(key.id - 1)]) {
      throw DataError("item keys: duplicate id " + std::to_string(key.id));
    }
    seen[static_cast<std::size_t>(key.id - 1)] = true;
    per_trait[trait_index(key.trait)] += 1;
  }
  for (Trait t : kAllTraits) {
    if (per_trait[trait_index(t)] != 10) {
      throw DataError(std::string("item keys: trait ") + to_string(t) + " has " +
                      std::to_string(per_trait[trait_index(t)]) + " items (expected 10)");
    }
  }
}

TraitScores score(const ResponseSheet& sheet, const ItemKeySet& keys) {
  validate_keys(keys);
  for (int id = 1; id <= 50; ++id) {
    const int answer = sheet.answers[static_cast<std::size_t>(id - 1)];
    if (answer < 1 || answer > 5) {
      throw DataError("participant " + sheet.participant_id + ": item " + std::to_string(id) +
                      " answer " + std::to_string(answer) + " outside 1..5");
    }
  }
  TraitScores scores;
  for (const auto& key : keys) {
    const int answer = sheet.answers[static_cast<std::size_t>(key.id - 1)];
    scores[key.trait] += (key.keyed == Keyed::Plus) ? answer : 6 - answer;
  }
  return scores;
}

namespace {

double median_int(std::vector<int> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

}  // namespace

std::map<std::string, TraitLabels> median_split(
    const std::map<std::string, TraitScores>& scores) {
  if (scores.size() < 2) throw DataError("median split needs at least 2 participants");
  std::array<double, 5> medians{};
  for (Trait t : kAllTraits) {
    std::vector<int> column;
    column.reserve(scores.size());
    for (const auto& [pid, s] : scores) column.push_back(s[t]);
    medians[trait_index(t)] = median_int(std::move(column));
  }
  std::map<std::string, TraitLabels> labels;
  for (const auto& [pid, s] : scores) {
    TraitLabels l;
    for (Trait t : kAllTraits) {
      l[t] = (static_cast<double>(s[t]) > medians[trait_index(t)]) ? Label::H : Label::L;
    }
    labels[pid] = l;
  }
  return labels;
}

std::array<double, 5> cohort_percentiles(const std::map<std::string, TraitScores>& scores,
                                         const TraitScores& target) {
  if (scores.empty()) throw DataError("cohort_percentiles: empty cohort");
  std::array<double, 5> out{};
  for (Trait t : kAllTraits) {
    std::size_t below = 0;
    for (const auto& [pid, s] : scores) {
      if (s[t] < target[t]) ++below;
    }
    out[trait_index(t)] = static_cast<double>(below) / static_cast<double>(scores.size());
  }
  return out;
}

ItemKeySet item_keys_from_json(const nlohmann::json& j) {
  ItemKeySet keys;
  try {
    for (const auto& item : j) {
      ItemKey key;
      key.id = item.at("id").get<int>();
      key.text = item.value("text", std::string{});
      key.trait = trait_from_string(item.at("trait").get<std::string>());
      const auto keyed = item.at("keyed").get<std::string>();
      if (keyed == "plus" || keyed == "+") {
        key.keyed = Keyed::Plus;
      } else if (keyed == "minus" || keyed == "-") {
        key.keyed = Keyed::Minus;
      } else {
        throw DataError("item keys: keyed must be plus or minus, got '" + keyed + "'");
      }
      keys.push_back(std::move(key));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("item key JSON: ") + e.what());
  }
  validate_keys(keys);
  return keys;
}

nlohmann::ordered_json item_keys_to_json(const ItemKeySet& keys) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& key : keys) {
    nlohmann::ordered_json item;
    item["id"] = key.id;
    item["text"] = key.text;
    item["trait"] = to_string(key.trait);
    item["keyed"] = (key.keyed == Keyed::Plus) ? "plus" : "minus";
    j.push_back(std::move(item));
  }
  return j;
}

namespace {

std::string responses_header() {
  std::string h = "participant_id";
  for (int i = 1; i <= 50; ++i) h += ",item_" + std::to_string(i);
  return h;
}

constexpr const char* kScoresHeader = "participant_id,Ex,Ag,Co,Es,Op";
constexpr const char* kLabelsHeader =
    "participant_id,Ex_class,Ag_class,Co_class,Es_class,Op_class";

// CSV emitters keep the Ex,Ag,Co,Es,Op column order.
constexpr std::array<Trait, 5> kCsvTraitOrder = {Trait::Ex, Trait::Ag, Trait::Co, Trait::Es,
                                                 Trait::Op};

}  // namespace

std::vector<ResponseSheet> read_responses_csv(std::istream& in) {
  const auto lines = csv::read_lines(in);
  if (lines.empty()) throw DataError("responses CSV: missing header");
  csv::require_header(lines[0], responses_header(), "responses CSV");
  std::vector<ResponseSheet> sheets;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split_fields(lines[i]);
    if (f.size() != 51) {
      throw DataError("responses CSV line " + std::to_string(i + 1) +
                      ": expected 51 fields, got " + std::to_string(f.size()));
    }
    ResponseSheet sheet;
    sheet.participant_id = f[0];
    for (int id = 1; id <= 50; ++id) {
      const auto v = parse_int(f[static_cast<std::size_t>(id)], "item answer", i + 1);
      if (v < 1 || v > 5) {
        throw DataError("responses CSV line " + std::to_string(i + 1) + ": item " +
                        std::to_string(id) + " answer " + std::to_string(v) +
                        " outside 1..5");
      }
      sheet.answers[static_cast<std::size_t>(id - 1)] = static_cast<int>(v);
    }
    sheets.push_back(std::move(sheet));
  }
  return sheets;
}

void write_scores_csv(const std::map<std::string, TraitScores>& scores, std::ostream& out) {
  out << kScoresHeader << '\n';
  for (const auto& [pid, s] : scores) {
    out << pid;
    for (Trait t : kCsvTraitOrder) out << ',' << s[t];
    out << '\n';
  }
}

std::map<std::string, TraitScores> read_scores_csv(std::istream& in) {
  const auto lines = csv::read_lines(in);
  if (lines.empty()) throw DataError("scores CSV: missing header");
  csv::require_header(lines[0], kScoresHeader, "scores CSV");
  std::map<std::string, TraitScores> scores;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split_fields(lines[i]);
    if (f.size() != 6) {
      throw DataError("scores CSV line " + std::to_string(i + 1) + ": expected 6 fields");
    }
    TraitScores s;
    for (std::size_t k = 0; k < 5; ++k) {
      const auto v = parse_int(f[k + 1], "trait score", i + 1);
      if (v < 10 || v > 50) {
        throw DataError("scores CSV line " + std::to_string(i + 1) + ": score " +
                        std::to_string(v) + " outside 10..50");
      }
      s[kCsvTraitOrder[k]] = static_cast<int>(v);
    }
    if (!scores.emplace(f[0], s).second) {
      throw DataError("scores CSV: duplicate participant '" + f[0] + "'");
    }
  }
  return scores;
}

void write_labels_csv(const std::map<std::string, TraitLabels>& labels, std::ostream& out) {
  out << kLabelsHeader << '\n';
  for (const auto& [pid, l] : labels) {
    out << pid;
    for (Trait t : kCsvTraitOrder) out << ',' << to_string(l[t]);
    out << '\n';
  }
}

std::map<std::string, TraitLabels> read_labels_csv(std::istream& in) {
  const auto lines = csv::read_lines(in);
  if (lines.empty()) throw DataError("labels CSV: missing header");
  csv::require_header(lines[0], kLabelsHeader, "labels CSV");
  std::map<std::string, TraitLabels> labels;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split_fields(lines[i]);
    if (f.size() != 6) {
      throw DataError("labels CSV line " + std::to_string(i + 1) + ": expected 6 fields");
    }
    TraitLabels l;
    for (std::size_t k = 0; k < 5; ++k) l[kCsvTraitOrder[k]] = label_from_string(f[k + 1]);
    if (!labels.emplace(f[0], l).second) {
      throw DataError("labels CSV: duplicate participant '" + f[0] + "'");
    }
  }
  return labels;
}

}  // namespace traitkit::ipip
