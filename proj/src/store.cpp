// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>

namespace civic {
namespace {

[[noreturn]] void storage_failure(const std::string& what) {
  throw Error(ErrorCode::StorageFailure, what + ": " + std::strerror(errno));
}

void put_u32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

void write_all(int fd, const Bytes& data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      storage_failure("log write failed");
    }
    done += static_cast<std::size_t>(n);
  }
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

[[noreturn]] void corrupt(std::uint64_t seq, const std::string& why) {
  throw Error(ErrorCode::CorruptLog, "corrupt log record at seq " + std::to_string(seq) + ": " + why);
}

}  // namespace

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::ReportSubmitted: return "ReportSubmitted";
    case EventKind::RatingApplied: return "RatingApplied";
    case EventKind::CommunityValidated: return "CommunityValidated";
    case EventKind::AdminVerdict: return "AdminVerdict";
    case EventKind::UserRegistered: return "UserRegistered";
  }
  return "ReportSubmitted";
}

EventKind parse_event_kind(std::string_view label) {
  for (auto k : {EventKind::ReportSubmitted, EventKind::RatingApplied, EventKind::CommunityValidated,
                 EventKind::AdminVerdict, EventKind::UserRegistered}) {
    if (label == to_string(k)) return k;
  }
  throw Error(ErrorCode::BadRequest, "unknown event kind '" + std::string(label) + "'");
}

void to_json(Json& j, const Event& e) {
  j = Json{{"seq", e.seq}, {"kind", to_string(e.kind)}, {"payload", e.payload},
           {"server_time", timestamp_json(e.server_time)}};
}

void from_json(const Json& j, Event& e) {
  e.seq = require_field(j, "seq").get<std::uint64_t>();
  e.kind = parse_event_kind(require_field(j, "kind").get<std::string>());
  e.payload = require_field(j, "payload");
  e.server_time = timestamp_from_json(require_field(j, "server_time"));
}

Bytes encode_record(std::string_view payload) {
  Bytes out;
  out.reserve(payload.size() + 8);
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  put_u32(out, crc32({reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size()}));
  return out;
}

DecodedLog decode_log(std::span<const std::uint8_t> image) {
  DecodedLog out;
  std::size_t pos = 0;
  while (pos < image.size()) {
    const std::uint64_t expected_seq = out.events.size() + 1;
    if (image.size() - pos < 4) {
      out.torn_tail = true;
      break;
    }
    const std::uint32_t len = get_u32(image.data() + pos);
    if (image.size() - pos - 4 < std::size_t{len} + 4) {
      out.torn_tail = true;
      break;
    }
    const auto payload = image.subspan(pos + 4, len);
    const std::uint32_t stored_crc = get_u32(image.data() + pos + 4 + len);
    if (crc32(payload) != stored_crc) corrupt(expected_seq, "CRC mismatch");

    Event event;
    try {
      from_json(Json::parse(payload.begin(), payload.end()), event);
    } catch (const std::exception& e) {
      corrupt(expected_seq, std::string("undecodable payload: ") + e.what());
    }
    if (event.seq != expected_seq) corrupt(expected_seq, "found seq " + std::to_string(event.seq));
    out.events.push_back(std::move(event));
    pos += 4 + std::size_t{len} + 4;
    out.valid_bytes = pos;
  }
  return out;
}

std::vector<Event> read_log(const std::filesystem::path& path) {
  const Bytes image = read_file(path);
  return decode_log(image).events;
}

EventLog::EventLog(std::filesystem::path path, Durability durability)
    : path_(std::move(path)), durability_(durability) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());

  const Bytes image = read_file(path_);
  DecodedLog decoded = decode_log(image);
  events_ = std::move(decoded.events);

  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) storage_failure("cannot open log " + path_.string());
  if (decoded.torn_tail) {
    // an interrupted append never reached its commit point; drop it
    if (::ftruncate(fd_, static_cast<off_t>(decoded.valid_bytes)) != 0) storage_failure("cannot truncate torn tail");
    if (::fsync(fd_) != 0) storage_failure("fsync failed");
  }
  committed_bytes_ = decoded.valid_bytes;
  if (::lseek(fd_, static_cast<off_t>(committed_bytes_), SEEK_SET) < 0) storage_failure("seek failed");
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

Event EventLog::append(EventKind kind, Json payload, Timestamp server_time) {
  Event event{last_seq() + 1, kind, std::move(payload), server_time};
  const Bytes record = encode_record(Json(event).dump());
  try {
    write_all(fd_, record);
    if (durability_ == Durability::fsync && ::fdatasync(fd_) != 0) storage_failure("fdatasync failed");
  } catch (const Error&) {
    // roll back to the last commit point so later appends stay well-framed
    if (::ftruncate(fd_, static_cast<off_t>(committed_bytes_)) == 0) {
      ::lseek(fd_, static_cast<off_t>(committed_bytes_), SEEK_SET);
    }
    throw;
  }
  committed_bytes_ += record.size();
  events_.push_back(event);
  return event;
}

BlobStore::BlobStore(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path BlobStore::path_for(std::string_view content_hash) const {
  return root_ / std::string(content_hash.substr(0, 2)) / std::string(content_hash);
}

std::string BlobStore::media_ref_for(std::string_view content_hash) {
  return "blobs/" + std::string(content_hash.substr(0, 2)) + "/" + std::string(content_hash);
}

bool BlobStore::contains(std::string_view content_hash) const {
  return content_hash.size() >= 2 && std::filesystem::exists(path_for(content_hash));
}

std::string BlobStore::put(std::span<const std::uint8_t> data) {
  const std::string hash = sha256_hex(data);
  const auto target = path_for(hash);
  if (!std::filesystem::exists(target)) {
    std::filesystem::create_directories(target.parent_path());
    const auto tmp = target.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
      if (!out) throw Error(ErrorCode::StorageFailure, "cannot write blob " + hash);
    }
    std::filesystem::rename(tmp, target);
  }
  return media_ref_for(hash);
}

}  // namespace civic
