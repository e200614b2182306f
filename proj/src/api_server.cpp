// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/api_server.hpp"

#include <httplib.h>

#include <charconv>

namespace civic {
namespace {

using httplib::Request;
using httplib::Response;

constexpr std::size_t kServerThreads = 64;

void send_json(Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status(code),
            Json{{"error", {{"code", error_code_name(code)}, {"message", message}}}});
}

std::optional<std::string> bearer_token(const Request& req) {
  const auto auth = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (auth.size() <= prefix.size() || auth.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  return auth.substr(prefix.size());
}

std::string require_token(const Request& req) {
  auto token = bearer_token(req);
  if (!token) throw Error(ErrorCode::Unauthorized, "missing bearer token");
  return *token;
}

std::optional<std::string> param(const Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

double number_param(const Request& req, const char* name, double fallback, ErrorCode on_error) {
  auto v = param(req, name);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used == v->size()) return d;
  } catch (const std::logic_error&) {
  }
  throw Error(on_error, std::string("query parameter '") + name + "' must be a number");
}

std::uint64_t unsigned_param(const Request& req, const char* name, std::uint64_t fallback, ErrorCode on_error) {
  auto v = param(req, name);
  if (!v) return fallback;
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    throw Error(on_error, std::string("query parameter '") + name + "' must be a non-negative integer");
  }
  return out;
}

ReportId path_report_id(const Request& req) {
  const std::string& s = req.matches[1];
  std::uint64_t id = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error(ErrorCode::UnknownReport, "bad report id");
  return ReportId{id};
}

std::optional<Bytes> attachment_data(const Json& body) {
  auto it = body.find("attachment_data");
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::BadAttachment, "attachment_data must be a base64 string");
  return base64_decode(it->get<std::string>());
}

SyncEntry decode_sync_entry(const Json& j) {
  SyncEntry entry;
  if (j.is_object()) {
    auto key = j.find("client_key");
    if (key != j.end() && key->is_string()) entry.client_key = key->get<std::string>();
  }
  try {
    ReportDraft draft;
    from_json(j, draft);
    entry.attachment_data = attachment_data(j);
    entry.draft = std::move(draft);
  } catch (const Error& e) {
    entry.decode_error = e;
  } catch (const Json::exception& e) {
    entry.decode_error = Error(ErrorCode::BadRequest, e.what());
  }
  return entry;
}

Json summary_json(const TrustSummary& s) {
  return Json{{"report_id", s.report_id.value},
              {"score", s.score},
              {"status", to_string(s.status.state())},
              {"provenance", s.status.provenance() ? Json(std::string(to_string(*s.status.provenance())))
                                                   : Json(nullptr)}};
}

Json outcome_json(const SyncOutcome& o) {
  Json j{{"client_key", o.client_key}, {"outcome", to_string(o.kind)}};
  if (o.report_id) j["report_id"] = o.report_id->value;
  if (o.error) j["error"] = {{"code", error_code_name(o.error->code())}, {"message", o.error->what()}};
  return j;
}

Timestamp period_bound(const Request& req, const char* name) {
  auto v = param(req, name);
  if (!v) throw Error(ErrorCode::BadPeriod, std::string("query parameter '") + name + "' is required");
  try {
    return parse_rfc3339(*v);
  } catch (const Error& e) {
    throw Error(ErrorCode::BadPeriod, e.what());
  }
}

/// Wraps a handler so domain errors become the documented JSON error body.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f = std::move(f)](const Request& req, Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const Json::exception& e) {
      send_error(res, ErrorCode::BadRequest, e.what());
    } catch (const std::exception& e) {
      send_error(res, ErrorCode::StorageFailure, e.what());
    }
  };
}

}  // namespace

ApiServer::ApiServer(Service& service, ApiOptions options)
    : service_(service), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
  http_->new_task_queue = [] { return new httplib::ThreadPool(kServerThreads); };
  install_routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw Error(ErrorCode::StorageFailure, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return bound;
}

bool ApiServer::listen(const std::string& host, int port) { return http_->listen(host, port); }

void ApiServer::stop() {
  if (http_->is_running()) http_->stop();
  if (thread_.joinable()) thread_.join();
}

void ApiServer::install_routes() {
  auto& svr = *http_;
  Service& svc = service_;
  const std::string api(kApiPrefix);

  if (!options_.cors_origin.empty()) {
    svr.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                             {"Access-Control-Allow-Headers", "Authorization, Content-Type, Last-Event-ID"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    svr.Options(R"(.*)", [](const Request&, Response& res) { res.status = 204; });
  }

  svr.Post(api + "/auth/register", guarded([&svc](const Request& req, Response& res) {
             const Json body = parse_body(req.body);
             const auto profile = svc.register_user(require_field(body, "name").get<std::string>(),
                                                    require_field(body, "credential").get<std::string>());
             send_json(res, 201, profile);
           }));

  svr.Post(api + "/auth/login", guarded([&svc](const Request& req, Response& res) {
             const Json body = parse_body(req.body);
             const Session s = svc.login(require_field(body, "name").get<std::string>(),
                                         require_field(body, "credential").get<std::string>());
             send_json(res, 200,
                       Json{{"token", s.token}, {"user_id", s.user_id.value}, {"expiry", timestamp_json(s.expiry)}});
           }));

  svr.Post(api + "/reports", guarded([&svc](const Request& req, Response& res) {
             const Json body = parse_body(req.body);
             ReportDraft draft;
             from_json(body, draft);
             const auto data = attachment_data(body);
             const SubmitResult r = svc.submit(bearer_token(req), draft, data, req.remote_addr);
             send_json(res, r.created ? 201 : 200, r.report);
           }));

  svr.Post(api + R"(/reports/(\d+)/ratings)", guarded([&svc](const Request& req, Response& res) {
             const Json body = parse_body(req.body);
             const Json& vote = require_field(body, "vote");
             if (!vote.is_number_integer()) throw Error(ErrorCode::BadRequest, "vote must be +1 or -1");
             const auto s = svc.rate(require_token(req), path_report_id(req), parse_vote(vote.get<int>()));
             send_json(res, 200, summary_json(s));
           }));

  svr.Get(api + "/feed", guarded([&svc](const Request& req, Response& res) {
            const auto page = unsigned_param(req, "page", 1, ErrorCode::BadPage);
            const auto page_size = unsigned_param(req, "page_size", 20, ErrorCode::BadPage);
            send_json(res, 200, Json{{"page", page}, {"page_size", page_size}, {"reports", svc.feed(page, page_size)}});
          }));

  svr.Get(api + "/map", guarded([&svc](const Request& req, Response& res) {
            BBox bbox;
            bbox.min_lat = number_param(req, "min_lat", bbox.min_lat, ErrorCode::BadBBox);
            bbox.min_lon = number_param(req, "min_lon", bbox.min_lon, ErrorCode::BadBBox);
            bbox.max_lat = number_param(req, "max_lat", bbox.max_lat, ErrorCode::BadBBox);
            bbox.max_lon = number_param(req, "max_lon", bbox.max_lon, ErrorCode::BadBBox);
            const double cell_size = number_param(req, "cell_size", svc.config().cell_size, ErrorCode::BadCellSize);
            std::optional<Category> category;
            if (auto c = param(req, "category"); c && !c->empty()) category = parse_category(*c);
            send_json(res, 200, Json{{"cell_size", cell_size}, {"cells", svc.map(bbox, cell_size, category)}});
          }));

  svr.Get(api + "/stats/categories", guarded([&svc](const Request&, Response& res) {
            const Stats s = svc.stats();
            send_json(res, 200, Json{{"validated_count", s.validated_count}, {"categories", s.categories}});
          }));

  svr.Post(api + "/sync", guarded([&svc](const Request& req, Response& res) {
             const Json body = parse_body(req.body);
             const Json& entries = require_field(body, "entries");
             if (!entries.is_array()) throw Error(ErrorCode::BadRequest, "entries must be an array");
             if (entries.size() > kMaxBatchEntries) {
               throw Error(ErrorCode::BatchTooLarge, "at most 100 entries per batch");
             }
             std::vector<SyncEntry> batch;
             batch.reserve(entries.size());
             for (const Json& e : entries) batch.push_back(decode_sync_entry(e));
             Json outcomes = Json::array();
             for (const auto& o : svc.sync(bearer_token(req), batch, req.remote_addr)) {
               outcomes.push_back(outcome_json(o));
             }
             send_json(res, 200, Json{{"outcomes", outcomes}});
           }));

  const auto stream_poll = options_.stream_poll;
  const auto keepalive = options_.stream_keepalive;
  svr.Get(api + "/stream", guarded([&svc, stream_poll, keepalive](const Request& req, Response& res) {
            std::uint64_t since = 0;
            if (req.has_header("Last-Event-ID")) {
              const auto v = req.get_header_value("Last-Event-ID");
              std::from_chars(v.data(), v.data() + v.size(), since);
            }
            since = unsigned_param(req, "since_seq", since, ErrorCode::BadRequest);

            struct Cursor {
              std::uint64_t seq;
              std::chrono::steady_clock::time_point last_write;
            };
            auto cursor = std::make_shared<Cursor>(Cursor{since, std::chrono::steady_clock::now()});
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream",
                [&svc, cursor, stream_poll, keepalive](std::size_t, httplib::DataSink& sink) {
                  if (svc.stopping()) {
                    sink.done();
                    return true;
                  }
                  auto frames = svc.frames_after(cursor->seq);
                  if (frames.empty()) {
                    svc.wait_for_frames(cursor->seq, stream_poll);
                    frames = svc.frames_after(cursor->seq);
                  }
                  const auto now = std::chrono::steady_clock::now();
                  if (frames.empty()) {
                    if (now - cursor->last_write < keepalive) return true;
                    static constexpr std::string_view kKeepalive = ": keepalive\n\n";
                    cursor->last_write = now;
                    return sink.write(kKeepalive.data(), kKeepalive.size());
                  }
                  // whole seq groups only, so a reconnect at any id never splits a group
                  std::string chunk;
                  for (const auto& f : frames) chunk += to_sse(f);
                  cursor->seq = frames.back().seq;
                  cursor->last_write = now;
                  return sink.write(chunk.data(), chunk.size());
                });
          }));

  svr.Post(api + R"(/admin/reports/(\d+)/verdict)", guarded([&svc](const Request& req, Response& res) {
             const Json body = parse_body(req.body);
             const Verdict v = parse_verdict(require_field(body, "verdict").get<std::string>());
             send_json(res, 200, summary_json(svc.admin_verdict(require_token(req), path_report_id(req), v)));
           }));

  svr.Get(api + "/admin/summary", guarded([&svc](const Request& req, Response& res) {
            const std::string token = require_token(req);
            const Period period{period_bound(req, "start"), period_bound(req, "end")};
            const Detail detail = parse_detail(param(req, "detail").value_or("summarized"));
            const std::string format = param(req, "format").value_or("wire");
            if (format != "wire" && format != "text") {
              throw Error(ErrorCode::BadRequest, "format must be 'wire' or 'text'");
            }
            const SummaryDocument doc = svc.summary(token, period, detail);
            if (format == "text") {
              res.status = 200;
              res.set_content(render_text(doc), "text/plain; charset=utf-8");
            } else {
              send_json(res, 200, doc);
            }
          }));

  svr.Get(api + "/admin/queue", guarded([&svc](const Request& req, Response& res) {
            Json items = Json::array();
            for (const QueueItem& item : svc.admin_queue(require_token(req))) {
              Json j = item.report;
              j["score"] = item.score;
              j["attachment"] = item.attachment ? Json(*item.attachment) : Json(nullptr);
              items.push_back(std::move(j));
            }
            send_json(res, 200, Json{{"reports", items}});
          }));

  const auto share = guarded([&svc](const Request& req, Response& res) {
    const ReportId id = path_report_id(req);
    Json j = svc.shared_report(id);
    j["share_path"] = svc.share_link(id);
    send_json(res, 200, j);
  });
  svr.Get(api + R"(/r/(\d+))", share);
  svr.Get(R"(/r/(\d+))", share);
}

}  // namespace civic
