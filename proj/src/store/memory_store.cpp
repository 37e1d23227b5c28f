#include <charconv>
#include <fstream>
#include <iterator>

#include "mmla/error.hpp"
#include "mmla/store.hpp"

namespace mmla::store {

std::string VersionToken::str() const {
  return std::to_string(activities_version) + "." + std::to_string(revision);
}

std::optional<VersionToken> VersionToken::parse(std::string_view s) {
  auto dot = s.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  VersionToken t;
  auto a = s.substr(0, dot);
  auto b = s.substr(dot + 1);
  auto [pa, ea] = std::from_chars(a.data(), a.data() + a.size(), t.activities_version);
  auto [pb, eb] = std::from_chars(b.data(), b.data() + b.size(), t.revision);
  if (ea != std::errc() || eb != std::errc() || pa != a.data() + a.size() || pb != b.data() + b.size())
    return std::nullopt;
  return t;
}

MemoryStore::MemoryStore() : salt_(random_session_id()) {}

VersionToken MemoryStore::put_session(const Session& s, std::optional<VersionToken> base) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(s.session_id);
  if (!base) {
    if (it != sessions_.end()) throw Error(ErrorCode::StaleWrite, "session " + s.session_id + " already exists");
  } else {
    if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "session " + s.session_id + " not found");
    if (it->second.token.revision != base->revision)
      throw Error(ErrorCode::StaleWrite, "session " + s.session_id + " changed since token " + base->str());
    if (s.activities_version < it->second.token.activities_version)
      throw Error(ErrorCode::StaleWrite, "activities_version may not decrease");
  }
  VersionToken token{s.activities_version, base ? base->revision + 1 : 1};
  sessions_[s.session_id] = {canonical(to_json(s)), token};
  return token;
}

Snapshot MemoryStore::get(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "session " + session_id + " not found");
  return {session_from_json(nlohmann::json::parse(it->second.document)), it->second.token};
}

std::vector<SessionSummary> MemoryStore::list_sessions() const {
  std::vector<SessionSummary> out;
  std::lock_guard lock(mu_);
  for (const auto& [id, entry] : sessions_) {
    Session s = session_from_json(nlohmann::json::parse(entry.document));
    out.push_back({id, s.activities_version, s.streams.size(), s.activities.size(), s.media.size()});
  }
  return out;
}

bool MemoryStore::contains(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return sessions_.count(session_id) != 0;
}

void MemoryStore::remove(const std::string& session_id) {
  std::lock_guard lock(mu_);
  if (sessions_.erase(session_id) == 0) throw Error(ErrorCode::NotFound, "session " + session_id + " not found");
}

void MemoryStore::record_anonymization(const AnonymizationRecord& rec) {
  std::lock_guard lock(mu_);
  records_.push_back(rec);
}

std::string MemoryStore::import_media(const std::string& session_id, const std::string& media_id,
                                      const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read media file " + source.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string rel = "media/" + session_id + "/" + media_id;
  std::lock_guard lock(mu_);
  media_[rel] = std::move(bytes);
  return rel;
}

std::vector<std::string> MemoryStore::persisted_bytes() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [_, entry] : sessions_) out.push_back(entry.document);
  for (const auto& r : records_) out.push_back(r.session_id + " " + r.learner_ref_digest + "\n");
  return out;
}

}  // namespace mmla::store
