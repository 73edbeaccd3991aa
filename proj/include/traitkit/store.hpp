#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include "traitkit/ipip.hpp"
#include "traitkit/traits.hpp"

namespace traitkit::store {

// Directory-backed cohort of questionnaire submissions. Responses append to
// responses.jsonl (single writer, flushed per line); scores are derived state
// and are re-derivable from the log plus the item key file.
class CohortStore {
 public:
  // Creates the directory if needed; writes items.json when absent, otherwise
  // verifies the stored keys against the manifest and replays the log.
  CohortStore(std::filesystem::path dir, ipip::ItemKeySet keys);

  // Opens an existing store, using its items.json.
  static CohortStore open(const std::filesystem::path& dir);

  const ipip::ItemKeySet& items() const { return keys_; }
  const std::filesystem::path& dir() const { return dir_; }

  // Scores, appends and flushes; duplicate participant ids are rejected.
  TraitScores submit(const ipip::ResponseSheet& sheet);

  std::map<std::string, TraitScores> scores() const;
  std::size_t size() const;

  // Recomputes every stored score from its stored responses and checks the
  // manifest checksums.
  void verify() const;

 private:
  void replay_log();

  mutable std::mutex mutex_;
  std::filesystem::path dir_;
  ipip::ItemKeySet keys_;
  std::map<std::string, ipip::ResponseSheet> responses_;
  std::map<std::string, TraitScores> scores_;
};

}  // namespace traitkit::store
