#pragma once

// Human inspection of NeedsReview records. Decisions go to an append-only
// journal next to the manifest (`<manifest>.journal`), fsync'ed before they
// are acknowledged, and are replayed over the manifest on load.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include "tibtts/error.hpp"
#include "tibtts/json_util.hpp"
#include "tibtts/manifest.hpp"
#include "tibtts/normalize.hpp"
#include "tibtts/script.hpp"

namespace tibtts::review {

using manifest::CorpusRecord;
using manifest::ReviewAction;
using manifest::ReviewDecision;
using manifest::Status;

inline std::filesystem::path journal_path(const std::filesystem::path& manifest_path) {
  auto p = manifest_path;
  p += ".journal";
  return p;
}

struct QueuePage {
  std::size_t total = 0;
  std::size_t offset = 0;
  std::size_t limit = 0;
  std::vector<CorpusRecord> items;

  Json to_json() const {
    Json items_json = Json::array();
    for (const auto& r : items) {
      items_json.push_back({{"id", r.id},
                            {"text_normalized", r.text_normalized},
                            {"syllable_count", r.syllable_count},
                            {"duration_s", r.duration_s},
                            {"consistency_z", r.consistency_z ? Json(*r.consistency_z) : Json(nullptr)},
                            {"hints", r.notes}});
    }
    return Json{{"total", total}, {"offset", offset}, {"limit", limit}, {"items", items_json}};
  }
};

struct DecisionResult {
  CorpusRecord record;
  bool noop = false;
};

class ReviewStore {
 public:
  ReviewStore(std::filesystem::path manifest_path, normalize::Normalizer normalizer)
      : manifest_path_(std::move(manifest_path)), normalizer_(std::move(normalizer)) {
    load();
  }

  ReviewStore(const ReviewStore&) = delete;
  ReviewStore& operator=(const ReviewStore&) = delete;

  ~ReviewStore() {
    if (journal_fd_ >= 0) ::close(journal_fd_);
  }

  // NeedsReview records ordered by id.
  QueuePage queue(std::size_t offset, std::size_t limit) const {
    std::shared_lock lock(mutex_);
    QueuePage page;
    page.offset = offset;
    page.limit = limit;
    std::vector<const CorpusRecord*> pending;
    for (const auto& r : records_) {
      if (r.status == Status::NeedsReview) pending.push_back(&r);
    }
    std::sort(pending.begin(), pending.end(), [](auto* a, auto* b) { return a->id < b->id; });
    page.total = pending.size();
    for (std::size_t i = offset; i < pending.size() && i - offset < limit; ++i) page.items.push_back(*pending[i]);
    return page;
  }

  CorpusRecord record(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return records_[index_of(id)];
  }

  std::vector<CorpusRecord> records() const {
    std::shared_lock lock(mutex_);
    return records_;
  }

  // Exact bytes of the processed audio file.
  std::string audio(const std::string& id) const {
    std::filesystem::path path;
    {
      std::shared_lock lock(mutex_);
      path = manifest_path_.parent_path() / manifest::processed_audio_relpath(records_[index_of(id)].id);
    }
    if (!std::filesystem::is_regular_file(path)) throw Error(ErrorCategory::UnknownId, "no processed audio for '" + id + "'");
    return json_util::read_file(path);
  }

  // Applies a decision to a NeedsReview record. The journal entry is on disk
  // before this returns. Re-sending a decision already applied is a no-op.
  DecisionResult decide(ReviewDecision d) {
    d.validate();
    if (d.timestamp.empty()) d.timestamp = manifest::utc_now_iso8601();
    std::unique_lock lock(mutex_);
    CorpusRecord& r = records_[index_of(d.record_id)];
    if (r.review && r.review->same_effect(d)) return {r, true};
    if (r.status != Status::NeedsReview) {
      throw Error(ErrorCategory::NotReviewable, "record '" + d.record_id + "' is " + manifest::status_name(r.status));
    }
    CorpusRecord updated = apply(r, d);
    append_journal(d);
    r = std::move(updated);
    ++applied_;
    return {r, false};
  }

  std::size_t applied() const {
    std::shared_lock lock(mutex_);
    return applied_;
  }

  // Folds the journal into the manifest file and empties the journal.
  void compact() {
    std::unique_lock lock(mutex_);
    manifest::write_manifest(manifest_path_, records_);
    if (::ftruncate(journal_fd_, 0) != 0 || ::fsync(journal_fd_) != 0) {
      throw Error(ErrorCategory::UnwritableOutput, "cannot truncate " + journal_path(manifest_path_).string());
    }
  }

  std::size_t ignored_journal_lines() const { return ignored_lines_; }
  const std::filesystem::path& manifest_path() const { return manifest_path_; }

 private:
  void load() {
    records_ = manifest::read_manifest(manifest_path_);
    for (std::size_t i = 0; i < records_.size(); ++i) by_id_.emplace(records_[i].id, i);
    const auto jpath = journal_path(manifest_path_);
    if (std::filesystem::exists(jpath)) {
      std::istringstream in(json_util::read_file(jpath));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        // A torn final line from an interrupted write was never acknowledged.
        try {
          const auto d = ReviewDecision::from_json(Json::parse(line));
          auto it = by_id_.find(d.record_id);
          if (it == by_id_.end()) {
            ++ignored_lines_;
            continue;
          }
          CorpusRecord& r = records_[it->second];
          if (r.review && r.review->same_effect(d)) continue;
          if (r.status != Status::NeedsReview) {
            ++ignored_lines_;
            continue;
          }
          r = apply(r, d);
        } catch (const std::exception&) {
          ++ignored_lines_;
        }
      }
    }
    journal_fd_ = ::open(jpath.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (journal_fd_ < 0) throw Error(ErrorCategory::UnwritableOutput, "cannot open " + jpath.string());
  }

  std::size_t index_of(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw Error(ErrorCategory::UnknownId, "unknown record '" + id + "'");
    return it->second;
  }

  CorpusRecord apply(const CorpusRecord& current, const ReviewDecision& d) const {
    CorpusRecord r = current;
    switch (d.action) {
      case ReviewAction::Accept:
        r.status = Status::Accepted;
        break;
      case ReviewAction::Reject:
        r.reject(manifest::RejectReason::ReviewerRejected);
        break;
      case ReviewAction::EditText: {
        const auto text = normalizer_(*d.edited_text);
        const std::size_t syllables = script::count_syllables(text.normalized);
        if (syllables == 0) throw Error(ErrorCategory::InvalidEdit, "edited text has no syllables after normalization");
        r.text_normalized = text.normalized;
        r.syllable_count = syllables;
        r.status = Status::Accepted;
        break;
      }
    }
    r.review = d;
    return r;
  }

  void append_journal(const ReviewDecision& d) {
    const std::string line = d.to_json().dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
      const auto n = ::write(journal_fd_, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCategory::UnwritableOutput, "journal write failed");
      }
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(journal_fd_) != 0) throw Error(ErrorCategory::UnwritableOutput, "journal fsync failed");
  }

  std::filesystem::path manifest_path_;
  normalize::Normalizer normalizer_;
  mutable std::shared_mutex mutex_;
  std::vector<CorpusRecord> records_;
  std::map<std::string, std::size_t> by_id_;
  int journal_fd_ = -1;
  std::size_t applied_ = 0;
  std::size_t ignored_lines_ = 0;
};

}  // namespace tibtts::review
