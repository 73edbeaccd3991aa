#pragma once

#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "traitkit/traits.hpp"

namespace traitkit::ipip {

enum class Keyed { Plus, Minus };

struct ItemKey {
  int id = 0;  // 1..50
  std::string text;
  Trait trait = Trait::Ex;
  Keyed keyed = Keyed::Plus;
};

using ItemKeySet = std::vector<ItemKey>;

// ids unique covering 1..50, exactly 10 items per trait.
void validate_keys(const ItemKeySet& keys);

struct ResponseSheet {
  std::string participant_id;
  std::array<int, 50> answers{};  // answers[id-1] in 1..5
};

// Plus-keyed items contribute the response, minus-keyed contribute
// 6 - response; per-trait sums land in [10, 50].
TraitScores score(const ResponseSheet& sheet, const ItemKeySet& keys);

// H iff strictly above the cohort median for that trait (even n: midpoint of
// the two central order statistics); ties at the median are L.
std::map<std::string, TraitLabels> median_split(
    const std::map<std::string, TraitScores>& scores);

// Per trait: fraction of the cohort scoring strictly below the target.
std::array<double, 5> cohort_percentiles(const std::map<std::string, TraitScores>& scores,
                                         const TraitScores& target);

ItemKeySet item_keys_from_json(const nlohmann::json& j);
nlohmann::ordered_json item_keys_to_json(const ItemKeySet& keys);

// CSV header: participant_id,item_1,...,item_50
std::vector<ResponseSheet> read_responses_csv(std::istream& in);

// CSV header: participant_id,Ex,Ag,Co,Es,Op
void write_scores_csv(const std::map<std::string, TraitScores>& scores, std::ostream& out);
std::map<std::string, TraitScores> read_scores_csv(std::istream& in);

// CSV header: participant_id,Ex_class,Ag_class,Co_class,Es_class,Op_class
void write_labels_csv(const std::map<std::string, TraitLabels>& labels, std::ostream& out);
std::map<std::string, TraitLabels> read_labels_csv(std::istream& in);

}  // namespace traitkit::ipip
