#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mmla/ingest.hpp"
#include "mmla/session.hpp"

namespace mmla::store {

/// Optimistic-concurrency token handed out by reads and checked by writes.
/// `revision` counts every committed write of the session document.
struct VersionToken {
  std::int64_t activities_version = 0;
  std::int64_t revision = 0;

  std::string str() const;
  static std::optional<VersionToken> parse(std::string_view s);
  bool operator==(const VersionToken&) const = default;
};

struct SessionSummary {
  std::string session_id;
  std::int64_t activities_version = 0;
  std::size_t stream_count = 0;
  std::size_t activity_count = 0;
  std::size_t media_count = 0;
  bool operator==(const SessionSummary&) const = default;
};

struct AnonymizationRecord {
  std::string session_id;
  std::string learner_ref_digest;  // hex SHA-256 of salt || learner_ref
};

struct Snapshot {
  Session session;
  VersionToken token;
};

class SessionStore {
 public:
  virtual ~SessionStore() = default;

  /// Commits `s`. `base` is the token the writer read; std::nullopt creates a
  /// new session. Throws StaleWrite when `base` no longer matches the latest
  /// revision, when creating an id that exists, or when activities_version
  /// would decrease.
  virtual VersionToken put_session(const Session& s, std::optional<VersionToken> base) = 0;
  virtual Snapshot get(const std::string& session_id) const = 0;
  virtual std::vector<SessionSummary> list_sessions() const = 0;
  virtual bool contains(const std::string& session_id) const = 0;
  virtual void remove(const std::string& session_id) = 0;

  virtual void record_anonymization(const AnonymizationRecord& rec) = 0;
  virtual std::string salt() const = 0;

  /// Copies a media file into the store; returns its store-relative path.
  virtual std::string import_media(const std::string& session_id, const std::string& media_id,
                                   const std::filesystem::path& source) = 0;
  /// Absolute directory served under /media, if the backend has one.
  virtual std::optional<std::filesystem::path> media_root() const = 0;

  Session get_session(const std::string& session_id) const { return get(session_id).session; }
};

class MemoryStore final : public SessionStore {
 public:
  MemoryStore();

  VersionToken put_session(const Session& s, std::optional<VersionToken> base) override;
  Snapshot get(const std::string& session_id) const override;
  std::vector<SessionSummary> list_sessions() const override;
  bool contains(const std::string& session_id) const override;
  void remove(const std::string& session_id) override;
  void record_anonymization(const AnonymizationRecord& rec) override;
  std::string salt() const override { return salt_; }
  std::string import_media(const std::string& session_id, const std::string& media_id,
                           const std::filesystem::path& source) override;
  std::optional<std::filesystem::path> media_root() const override { return std::nullopt; }

  const std::vector<AnonymizationRecord>& anonymization_records() const { return records_; }
  /// Serialized documents exactly as they would be persisted.
  std::vector<std::string> persisted_bytes() const;

 private:
  struct Entry {
    std::string document;  // canonical session JSON
    VersionToken token;
  };
  mutable std::mutex mu_;
  std::map<std::string, Entry> sessions_;
  std::map<std::string, std::string> media_;
  std::vector<AnonymizationRecord> records_;
  std::string salt_;
};

/// Document-per-session JSON files under a root directory:
///   <root>/sessions/<session_id>.json
///   <root>/media/<session_id>/<media_id>
///   <root>/index.json
///   <root>/anonymization.digests
/// Every document write goes to a temporary file that is renamed over the
/// target, so readers always see a complete version.
class FileStore final : public SessionStore {
 public:
  explicit FileStore(std::filesystem::path root);

  VersionToken put_session(const Session& s, std::optional<VersionToken> base) override;
  Snapshot get(const std::string& session_id) const override;
  std::vector<SessionSummary> list_sessions() const override;
  bool contains(const std::string& session_id) const override;
  void remove(const std::string& session_id) override;
  void record_anonymization(const AnonymizationRecord& rec) override;
  std::string salt() const override { return salt_; }
  std::string import_media(const std::string& session_id, const std::string& media_id,
                           const std::filesystem::path& source) override;
  std::optional<std::filesystem::path> media_root() const override { return root_ / "media"; }

  const std::filesystem::path& root() const { return root_; }

  /// Test hook invoked between the temporary write and the rename of each
  /// atomic write, with the target path. Throwing from it simulates a crash.
  void set_failpoint(std::function<void(const std::filesystem::path&)> fp) { failpoint_ = std::move(fp); }

 private:
  std::filesystem::path document_path(const std::string& session_id) const;
  void write_atomic(const std::filesystem::path& target, const std::string& bytes);
  nlohmann::json read_index() const;
  void update_index(const std::string& session_id, const std::optional<std::pair<SessionSummary, std::int64_t>>& entry);

  std::filesystem::path root_;
  std::string salt_;
  std::function<void(const std::filesystem::path&)> failpoint_;

  // Writers are serialized in-process by write_mu_ and across processes by
  // an flock on <root>/.lock.
  std::mutex write_mu_;
};

/// Fresh random 128-bit session id (32 lowercase hex chars) not present in
/// `store`, plus the salted digest of the manifest's learner_ref.
AnonymizationRecord anonymize(const ingest::SessionManifest& manifest, const SessionStore& store);

std::string random_session_id();
std::string learner_digest(std::string_view salt, std::string_view learner_ref);

}  // namespace mmla::store
