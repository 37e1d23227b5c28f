#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mmla/error.hpp"
#include "mmla/store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mmla::store {
namespace {

[[noreturn]] void io_failure(const std::string& what, const fs::path& p) {
  throw Error(ErrorCode::StorageFailure, what + " " + p.string() + ": " + std::strerror(errno));
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_all(int fd, const std::string& bytes, const fs::path& p) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    ssize_t n = ::write(fd, bytes.data() + off, bytes.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("write", p);
    }
    off += static_cast<std::size_t>(n);
  }
}

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

// Exclusive advisory lock on a file, held for the object's lifetime.
class FileLock {
 public:
  explicit FileLock(const fs::path& p) : fd_(::open(p.c_str(), O_RDWR | O_CREAT, 0644)) {
    if (fd_ < 0) io_failure("open lock", p);
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR) io_failure("flock", p);
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_;
};

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

struct Document {
  std::int64_t revision = 0;
  json session;
};

std::optional<Document> load_document(const fs::path& p) {
  auto bytes = read_file(p);
  if (!bytes) return std::nullopt;
  json j = json::parse(*bytes, nullptr, false);
  if (j.is_discarded() || !j.contains("revision") || !j.contains("session"))
    throw Error(ErrorCode::StorageFailure, "corrupt session document " + p.string());
  return Document{j["revision"].get<std::int64_t>(), std::move(j["session"])};
}

json summary_json(const SessionSummary& s, std::int64_t revision) {
  return {{"activities_version", s.activities_version},
          {"revision", revision},
          {"streams", s.stream_count},
          {"activities", s.activity_count},
          {"media", s.media_count}};
}

}  // namespace

FileStore::FileStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "sessions", ec);
  fs::create_directories(root_ / "media", ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot create store at " + root_.string() + ": " + ec.message());

  std::lock_guard guard(write_mu_);
  FileLock lock(root_ / ".lock");

  // Leftovers of interrupted atomic writes are never valid data.
  for (const auto& entry : fs::directory_iterator(root_ / "sessions"))
    if (entry.path().filename().string().find(".tmp.") != std::string::npos) fs::remove(entry.path(), ec);

  const fs::path digests = root_ / "anonymization.digests";
  if (auto text = read_file(digests); text && text->rfind("salt ", 0) == 0) {
    salt_ = text->substr(5, text->find('\n') - 5);
  } else {
    salt_ = random_session_id() + random_session_id();
    write_atomic(digests, "salt " + salt_ + "\n");
  }

  // The index is derived data; rebuild it from the authoritative documents in
  // case a previous writer stopped between a document rename and the index
  // update.
  {
    json index = json::object();
    for (const auto& entry : fs::directory_iterator(root_ / "sessions")) {
      if (entry.path().extension() != ".json") continue;
      auto doc = load_document(entry.path());
      Session s = session_from_json(doc->session);
      index[s.session_id] = summary_json({s.session_id, s.activities_version, s.streams.size(),
                                          s.activities.size(), s.media.size()},
                                         doc->revision);
    }
    write_atomic(root_ / "index.json", canonical(index));
  }
}

fs::path FileStore::document_path(const std::string& session_id) const {
  if (!valid_id(session_id)) throw Error(ErrorCode::NotFound, "invalid session id '" + session_id + "'");
  return root_ / "sessions" / (session_id + ".json");
}

void FileStore::write_atomic(const fs::path& target, const std::string& bytes) {
  const fs::path tmp = target.string() + ".tmp." + random_session_id().substr(0, 8);
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) io_failure("create", tmp);
  try {
    write_all(fd, bytes, tmp);
    if (::fsync(fd) != 0) io_failure("fsync", tmp);
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (failpoint_) failpoint_(target);
  if (::rename(tmp.c_str(), target.c_str()) != 0) {
    ::unlink(tmp.c_str());
    io_failure("rename", target);
  }
  fsync_dir(target.parent_path());
}

json FileStore::read_index() const {
  auto text = read_file(root_ / "index.json");
  if (!text) return json::object();
  json j = json::parse(*text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::StorageFailure, "corrupt index.json");
  return j;
}

void FileStore::update_index(const std::string& session_id,
                             const std::optional<std::pair<SessionSummary, std::int64_t>>& entry) {
  json index = read_index();
  if (entry)
    index[session_id] = summary_json(entry->first, entry->second);
  else
    index.erase(session_id);
  write_atomic(root_ / "index.json", canonical(index));
}

VersionToken FileStore::put_session(const Session& s, std::optional<VersionToken> base) {
  const fs::path path = document_path(s.session_id);
  std::lock_guard guard(write_mu_);
  FileLock lock(root_ / ".lock");

  auto current = load_document(path);
  std::int64_t revision = 1;
  if (!base) {
    if (current) throw Error(ErrorCode::StaleWrite, "session " + s.session_id + " already exists");
  } else {
    if (!current) throw Error(ErrorCode::NotFound, "session " + s.session_id + " not found");
    if (current->revision != base->revision)
      throw Error(ErrorCode::StaleWrite, "session " + s.session_id + " changed since token " + base->str());
    if (s.activities_version < current->session.at("activities_version").get<std::int64_t>())
      throw Error(ErrorCode::StaleWrite, "activities_version may not decrease");
    revision = current->revision + 1;
  }

  json doc = {{"revision", revision}, {"session", to_json(s)}};
  write_atomic(path, canonical(doc));
  update_index(s.session_id,
               std::pair{SessionSummary{s.session_id, s.activities_version, s.streams.size(), s.activities.size(),
                                        s.media.size()},
                         revision});
  return {s.activities_version, revision};
}

Snapshot FileStore::get(const std::string& session_id) const {
  auto doc = load_document(document_path(session_id));
  if (!doc) throw Error(ErrorCode::NotFound, "session " + session_id + " not found");
  Session s = session_from_json(doc->session);
  VersionToken token{s.activities_version, doc->revision};
  return {std::move(s), token};
}

std::vector<SessionSummary> FileStore::list_sessions() const {
  std::vector<SessionSummary> out;
  const json index = read_index();
  for (const auto& [id, e] : index.items()) {
    out.push_back({id, e.at("activities_version").get<std::int64_t>(), e.at("streams").get<std::size_t>(),
                   e.at("activities").get<std::size_t>(), e.at("media").get<std::size_t>()});
  }
  return out;
}

bool FileStore::contains(const std::string& session_id) const {
  return valid_id(session_id) && fs::exists(document_path(session_id));
}

void FileStore::remove(const std::string& session_id) {
  const fs::path path = document_path(session_id);
  std::lock_guard guard(write_mu_);
  FileLock lock(root_ / ".lock");
  if (!fs::exists(path)) throw Error(ErrorCode::NotFound, "session " + session_id + " not found");
  std::error_code ec;
  fs::remove(path, ec);
  fs::remove_all(root_ / "media" / session_id, ec);
  update_index(session_id, std::nullopt);
}

void FileStore::record_anonymization(const AnonymizationRecord& rec) {
  std::lock_guard guard(write_mu_);
  FileLock lock(root_ / ".lock");
  std::string text = read_file(root_ / "anonymization.digests").value_or("salt " + salt_ + "\n");
  text += rec.session_id + " " + rec.learner_ref_digest + "\n";
  write_atomic(root_ / "anonymization.digests", text);
}

std::string FileStore::import_media(const std::string& session_id, const std::string& media_id,
                                    const fs::path& source) {
  if (!valid_id(session_id) || !valid_id(media_id))
    throw Error(ErrorCode::BadParams, "invalid session or media id");
  const fs::path dir = root_ / "media" / session_id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::copy_file(source, dir / media_id, fs::copy_options::overwrite_existing, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot copy media file " + source.string() + ": " + ec.message());
  return "media/" + session_id + "/" + media_id;
}

}  // namespace mmla::store
