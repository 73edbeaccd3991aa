#include "traitkit/store.hpp"

#include <fstream>

#include "json.hpp"
#include "traitkit/error.hpp"
#include "traitkit/manifest.hpp"

namespace traitkit::store {

namespace {

constexpr const char* kItemsFile = "items.json";
constexpr const char* kLogFile = "responses.jsonl";

nlohmann::ordered_json response_to_json(const ipip::ResponseSheet& sheet,
                                        const TraitScores& scores) {
  nlohmann::ordered_json j;
  j["participant_id"] = sheet.participant_id;
  j["answers"] = sheet.answers;
  nlohmann::ordered_json s;
  for (Trait t : kAllTraits) s[to_string(t)] = scores[t];
  j["scores"] = std::move(s);
  return j;
}

}  // namespace

CohortStore::CohortStore(std::filesystem::path dir, ipip::ItemKeySet keys)
    : dir_(std::move(dir)), keys_(std::move(keys)) {
  ipip::validate_keys(keys_);
  std::filesystem::create_directories(dir_);
  const auto items_path = dir_ / kItemsFile;
  if (!std::filesystem::exists(items_path)) {
    write_file(items_path, ipip::item_keys_to_json(keys_).dump(2) + "\n");
    write_manifest(dir_, {kItemsFile});
  }
  replay_log();
}

CohortStore CohortStore::open(const std::filesystem::path& dir) {
  const auto items_path = dir / kItemsFile;
  if (!std::filesystem::exists(items_path)) {
    throw DataError("store '" + dir.string() + "' has no " + kItemsFile);
  }
  auto keys = ipip::item_keys_from_json(nlohmann::json::parse(read_file(items_path)));
  return CohortStore(dir, std::move(keys));
}

void CohortStore::replay_log() {
  const auto log_path = dir_ / kLogFile;
  if (!std::filesystem::exists(log_path)) return;
  std::ifstream in(log_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      ipip::ResponseSheet sheet;
      sheet.participant_id = j.at("participant_id").get<std::string>();
      const auto& answers = j.at("answers");
      if (answers.size() != 50) throw DataError("wrong answer count");
      for (std::size_t i = 0; i < 50; ++i) sheet.answers[i] = answers.at(i).get<int>();
      const TraitScores scores = ipip::score(sheet, keys_);
      if (!responses_.emplace(sheet.participant_id, sheet).second) {
        throw DataError("duplicate participant '" + sheet.participant_id + "'");
      }
      scores_[sheet.participant_id] = scores;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("store log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

TraitScores CohortStore::submit(const ipip::ResponseSheet& sheet) {
  if (sheet.participant_id.empty()) throw DataError("submit: empty participant_id");
  const TraitScores scores = ipip::score(sheet, keys_);

  std::lock_guard<std::mutex> lock(mutex_);
  if (responses_.count(sheet.participant_id) != 0) {
    throw DataError("duplicate participant '" + sheet.participant_id + "'");
  }
  std::ofstream out(dir_ / kLogFile, std::ios::app);
  if (!out) throw DataError("store: cannot append to log");
  out << response_to_json(sheet, scores).dump() << '\n';
  out.flush();
  if (!out) throw DataError("store: log append failed");
  responses_.emplace(sheet.participant_id, sheet);
  scores_[sheet.participant_id] = scores;
  return scores;
}

std::map<std::string, TraitScores> CohortStore::scores() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return scores_;
}

std::size_t CohortStore::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return scores_.size();
}

void CohortStore::verify() const {
  verify_manifest(dir_);
  std::lock_guard<std::mutex> lock(mutex_);
  for (const auto& [pid, sheet] : responses_) {
    if (!(ipip::score(sheet, keys_) == scores_.at(pid))) {
      throw DataError("store: stored score for '" + pid + "' does not re-derive");
    }
  }
}

}  // namespace traitkit::store
