// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/client.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "civic/crypto.hpp"

namespace civic {
namespace {

Json decode_response(const httplib::Result& res) {
  if (!res) throw NetworkError("server unreachable: " + httplib::to_string(res.error()));
  Json body = Json::parse(res->body, nullptr, false);
  if (res->status >= 400) {
    if (!body.is_discarded() && body.contains("error")) {
      const Json& err = body["error"];
      throw Error(error_code_from_name(err.value("code", "BadRequest")), err.value("message", ""));
    }
    throw Error(ErrorCode::BadRequest, "HTTP " + std::to_string(res->status));
  }
  if (body.is_discarded()) throw Error(ErrorCode::BadRequest, "server sent malformed JSON");
  return body;
}

Bytes read_bytes(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::BadAttachment, "cannot read attachment " + file.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

ApiClient::ApiClient(const std::string& base_url, std::optional<std::string> token)
    : http_(std::make_unique<httplib::Client>(base_url)), token_(std::move(token)) {
  http_->set_connection_timeout(std::chrono::seconds(3));
  http_->set_read_timeout(std::chrono::seconds(30));
}

ApiClient::~ApiClient() = default;
ApiClient::ApiClient(ApiClient&&) noexcept = default;
ApiClient& ApiClient::operator=(ApiClient&&) noexcept = default;

namespace {

httplib::Headers auth_headers(const std::optional<std::string>& token) {
  httplib::Headers h;
  if (token) h.emplace("Authorization", "Bearer " + *token);
  return h;
}

}  // namespace

Json ApiClient::post(const std::string& path, const Json& body) {
  return decode_response(http_->Post(path, auth_headers(token_), body.dump(), "application/json"));
}

Json ApiClient::get(const std::string& path) { return decode_response(http_->Get(path, auth_headers(token_))); }

std::string ApiClient::get_text(const std::string& path) {
  auto res = http_->Get(path, auth_headers(token_));
  if (!res) throw NetworkError("server unreachable: " + httplib::to_string(res.error()));
  if (res->status >= 400) decode_response(res);
  return res->body;
}

AttachmentMeta describe_attachment(const std::filesystem::path& file, std::optional<AttachmentKind> kind) {
  const Bytes data = read_bytes(file);
  if (data.empty()) throw Error(ErrorCode::BadAttachment, "attachment " + file.string() + " is empty");
  AttachmentMeta meta;
  if (kind) {
    meta.kind = *kind;
  } else {
    std::string ext = file.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const bool video = ext == ".mp4" || ext == ".mov" || ext == ".3gp" || ext == ".webm" || ext == ".mkv";
    meta.kind = video ? AttachmentKind::video : AttachmentKind::photo;
  }
  meta.content_hash = sha256_hex(data);
  meta.size_bytes = data.size();
  return meta;
}

Json draft_request(const ReportDraft& draft, const std::optional<std::filesystem::path>& attachment) {
  Json body = draft;
  if (attachment) {
    const Bytes data = read_bytes(*attachment);
    if (draft.attachment && sha256_hex(data) != draft.attachment->content_hash) {
      throw Error(ErrorCode::BadAttachment, "attachment " + attachment->string() + " changed since it was queued");
    }
    body["attachment_data"] = base64_encode(data);
  }
  return body;
}

// ---------------------------------------------------------------------------
// spool
// ---------------------------------------------------------------------------

std::string_view to_string(QueueEntry::State s) {
  switch (s) {
    case QueueEntry::State::queued: return "queued";
    case QueueEntry::State::synced: return "synced";
    case QueueEntry::State::failed: return "failed";
  }
  return "queued";
}

void to_json(Json& j, const QueueEntry& e) {
  j = Json{{"client_key", e.client_key},
           {"draft", e.draft},
           {"attachment_path", e.attachment_path ? Json(e.attachment_path->string()) : Json(nullptr)},
           {"queued_at", timestamp_json(e.queued_at)},
           {"state", to_string(e.state)},
           {"report_id", e.report_id ? Json(*e.report_id) : Json(nullptr)},
           {"error_code", e.error_code ? Json(*e.error_code) : Json(nullptr)},
           {"error_message", e.error_message ? Json(*e.error_message) : Json(nullptr)}};
}

void from_json(const Json& j, QueueEntry& e) {
  e.client_key = require_field(j, "client_key").get<std::string>();
  from_json(require_field(j, "draft"), e.draft);
  const Json& path = require_field(j, "attachment_path");
  e.attachment_path = path.is_null() ? std::nullopt : std::optional<std::filesystem::path>(path.get<std::string>());
  e.queued_at = timestamp_from_json(require_field(j, "queued_at"));
  const std::string state = require_field(j, "state").get<std::string>();
  e.state = state == "synced" ? QueueEntry::State::synced
            : state == "failed" ? QueueEntry::State::failed
                                : QueueEntry::State::queued;
  auto opt_string = [&](const char* name) -> std::optional<std::string> {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
  };
  auto rid = j.find("report_id");
  e.report_id = (rid == j.end() || rid->is_null()) ? std::nullopt : std::optional(rid->get<std::uint64_t>());
  e.error_code = opt_string("error_code");
  e.error_message = opt_string("error_message");
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content, bool private_file) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp);
  }
  if (private_file) {
    std::filesystem::permissions(tmp, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write,
                                 std::filesystem::perm_options::replace);
  }
  std::filesystem::rename(tmp, path);
}

Spool::Spool(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

std::filesystem::path Spool::file_for(const QueueEntry& e) const {
  const auto ms = e.queued_at.time_since_epoch().count();
  char prefix[32];
  std::snprintf(prefix, sizeof(prefix), "%016lld", static_cast<long long>(ms));
  return dir_ / (std::string(prefix) + "-" + e.client_key + ".json");
}

std::size_t Spool::enqueue(ReportDraft draft, std::optional<std::filesystem::path> attachment_path) {
  QueueEntry e;
  e.client_key = random_hex(16);
  e.queued_at = now_utc();
  draft.client_key = e.client_key;
  if (draft.client_time == Timestamp{}) draft.client_time = e.queued_at;
  e.draft = std::move(draft);
  if (attachment_path) e.attachment_path = std::filesystem::absolute(*attachment_path);
  write_file_atomic(file_for(e), Json(e).dump(2));
  return queued().size();
}

std::vector<QueueEntry> Spool::entries() const {
  std::vector<std::filesystem::path> files;
  for (const auto& f : std::filesystem::directory_iterator(dir_)) {
    if (f.is_regular_file() && f.path().extension() == ".json") files.push_back(f.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<QueueEntry> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) continue;  // stray file; entries are only ever replaced by rename
    QueueEntry e;
    from_json(j, e);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<QueueEntry> Spool::queued() const {
  auto all = entries();
  std::erase_if(all, [](const QueueEntry& e) { return e.state != QueueEntry::State::queued; });
  return all;
}

void Spool::update(const QueueEntry& entry) { write_file_atomic(file_for(entry), Json(entry).dump(2)); }

std::vector<SyncResult> sync_queue(ApiClient& client, Spool& spool) {
  const auto pending = spool.queued();
  std::vector<SyncResult> results;

  for (std::size_t first = 0; first < pending.size(); first += kSyncChunk) {
    const std::size_t last = std::min(pending.size(), first + kSyncChunk);

    std::vector<QueueEntry> batch;
    Json entries = Json::array();
    for (std::size_t i = first; i < last; ++i) {
      QueueEntry e = pending[i];
      try {
        entries.push_back(draft_request(e.draft, e.attachment_path));
        batch.push_back(std::move(e));
      } catch (const Error& err) {
        e.state = QueueEntry::State::failed;
        e.error_code = std::string(error_code_name(err.code()));
        e.error_message = err.what();
        spool.update(e);
        results.push_back({e.client_key, "error", std::nullopt, e.error_code, e.error_message});
      }
    }
    if (batch.empty()) continue;

    const Json response = client.post("/api/v1/sync", Json{{"entries", entries}});
    const Json& outcomes = response.at("outcomes");
    for (std::size_t i = 0; i < batch.size() && i < outcomes.size(); ++i) {
      QueueEntry& e = batch[i];
      const Json& o = outcomes[i];
      SyncResult r{e.client_key, o.at("outcome").get<std::string>(), std::nullopt, std::nullopt, std::nullopt};
      if (r.outcome == "created" || r.outcome == "duplicate") {
        r.report_id = o.at("report_id").get<std::uint64_t>();
        e.state = QueueEntry::State::synced;
        e.report_id = r.report_id;
      } else {
        r.error_code = o.at("error").at("code").get<std::string>();
        r.error_message = o.at("error").at("message").get<std::string>();
        const auto code = error_code_from_name(*r.error_code);
        if (code == ErrorCode::RateLimited || code == ErrorCode::Unauthorized || code == ErrorCode::StorageFailure) {
          r.outcome = "kept";
        } else {
          e.state = QueueEntry::State::failed;
          e.error_code = r.error_code;
          e.error_message = r.error_message;
        }
      }
      if (e.state != QueueEntry::State::queued) spool.update(e);
      results.push_back(std::move(r));
    }
  }
  return results;
}

}  // namespace civic
