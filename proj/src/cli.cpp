// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "civic/client.hpp"
#include "civic/crypto.hpp"

namespace civic {

ClientConfig load_client_config(const std::filesystem::path& path) {
  ClientConfig cfg;
  std::ifstream in(path);
  if (!in) return cfg;
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return cfg;
  cfg.server = j.value("server", cfg.server);
  if (j.contains("token") && j["token"].is_string()) cfg.token = j["token"].get<std::string>();
  if (j.contains("name") && j["name"].is_string()) cfg.name = j["name"].get<std::string>();
  if (j.contains("spool_dir") && j["spool_dir"].is_string()) cfg.spool_dir = j["spool_dir"].get<std::string>();
  return cfg;
}

void save_client_config(const std::filesystem::path& path, const ClientConfig& cfg) {
  Json j{{"server", cfg.server}};
  if (cfg.token) j["token"] = *cfg.token;
  if (cfg.name) j["name"] = *cfg.name;
  if (cfg.spool_dir) j["spool_dir"] = cfg.spool_dir->string();
  write_file_atomic(path, j.dump(2), /*private_file=*/true);
}

std::filesystem::path default_client_config_path() {
  if (const char* p = std::getenv("CIVIC_CLIENT_CONFIG")) return p;
  const char* home = std::getenv("HOME");
  return std::filesystem::path(home ? home : ".") / ".config" / "civic" / "client.json";
}

std::string render_map_grid(const Json& cells) {
  if (cells.empty()) return "no validated reports in this area\n";

  std::map<std::pair<std::int64_t, std::int64_t>, std::uint64_t> totals;
  std::int64_t min_row = INT64_MAX, max_row = INT64_MIN, min_col = INT64_MAX, max_col = INT64_MIN;
  double cell_size = 0.0;
  for (const Json& c : cells) {
    const auto row = c.at("index").at("row").get<std::int64_t>();
    const auto col = c.at("index").at("col").get<std::int64_t>();
    cell_size = c.at("index").at("cell_size").get<double>();
    totals[{row, col}] = c.at("total").get<std::uint64_t>();
    min_row = std::min(min_row, row);
    max_row = std::max(max_row, row);
    min_col = std::min(min_col, col);
    max_col = std::max(max_col, col);
  }

  std::ostringstream os;
  char buf[96];
  if (max_col - min_col >= 40 || max_row - min_row >= 60) {
    os << "      ROW        COL  TOTAL\n";
    for (const auto& [rc, total] : totals) {
      std::snprintf(buf, sizeof(buf), "%9lld %10lld %6llu\n", static_cast<long long>(rc.first),
                    static_cast<long long>(rc.second), static_cast<unsigned long long>(total));
      os << buf;
    }
    return os.str();
  }

  std::snprintf(buf, sizeof(buf), "cell %.4f deg; rows %lld..%lld (north up), cols %lld..%lld\n", cell_size,
                static_cast<long long>(min_row), static_cast<long long>(max_row), static_cast<long long>(min_col),
                static_cast<long long>(max_col));
  os << buf;
  for (std::int64_t row = max_row; row >= min_row; --row) {
    std::snprintf(buf, sizeof(buf), "%9.4f |", static_cast<double>(row) * cell_size);
    os << buf;
    for (std::int64_t col = min_col; col <= max_col; ++col) {
      auto it = totals.find({row, col});
      if (it == totals.end()) {
        os << "   .";
      } else {
        std::snprintf(buf, sizeof(buf), "%4llu", static_cast<unsigned long long>(it->second));
        os << buf;
      }
    }
    os << "\n";
  }
  return os.str();
}

namespace {

struct Globals {
  std::string server;
  std::filesystem::path config_path;
  bool json = false;
};

std::string categories_text(const Json& cats) {
  std::string out;
  for (const auto& c : cats) {
    if (!out.empty()) out += ",";
    out += c.get<std::string>();
  }
  return out;
}

CategorySet parse_category_list(const std::string& text) {
  CategorySet cats;
  std::stringstream ss(text);
  std::string label;
  while (std::getline(ss, label, ',')) {
    if (!label.empty()) cats.insert(parse_category(label));
  }
  return cats;
}

int parse_vote_label(const std::string& v) {
  if (v == "up" || v == "+1" || v == "1" || v == "support") return 1;
  if (v == "down" || v == "-1" || v == "dispute") return -1;
  throw Error(ErrorCode::BadRequest, "vote must be up/down, support/dispute or +1/-1");
}

std::string resolve_credential(const std::string& given) {
  if (!given.empty()) return given;
  if (const char* c = std::getenv("CIVIC_CREDENTIAL")) return c;
  throw Error(ErrorCode::WeakCredential, "pass --credential or set CIVIC_CREDENTIAL");
}

void print_report_line(std::ostream& out, const Json& r) {
  char loc[64];
  std::snprintf(loc, sizeof(loc), "%.5f,%.5f", r.at("location").at("lat").get<double>(),
                r.at("location").at("lon").get<double>());
  out << "#" << r.at("report_id").get<std::uint64_t>() << " [" << r.at("status").get<std::string>() << "] "
      << categories_text(r.at("categories")) << " @" << loc << " by " << r.at("author").get<std::string>() << " "
      << r.at("server_time").get<std::string>();
  const std::string text = r.at("text").get<std::string>();
  if (!text.empty()) out << ": " << text;
  out << "\n";
}

std::filesystem::path spool_dir(const Globals& g, const ClientConfig& cfg) {
  if (cfg.spool_dir) return *cfg.spool_dir;
  return g.config_path.parent_path() / "spool";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"civic - pollution reporter client"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("--server", g.server, "Server base URL (default: cached or http://127.0.0.1:8080)");
  app.add_option("--config", g.config_path, "Client config file");
  app.add_flag("--json", g.json, "Machine-readable output");

  std::string name, credential;
  auto* reg = app.add_subcommand("register", "Create an account");
  reg->add_option("name", name)->required();
  reg->add_option("--credential", credential);

  auto* login = app.add_subcommand("login", "Log in and cache the session token");
  login->add_option("name", name)->required();
  login->add_option("--credential", credential);

  std::string categories, text, attach, attach_kind, source = "manual";
  double lat = 0.0, lon = 0.0;
  bool anonymous = false, offline = false;
  auto* report = app.add_subcommand("report", "Submit a pollution report");
  report->add_option("categories", categories, "Comma-separated categories")->required();
  report->add_option("lat", lat)->required();
  report->add_option("lon", lon)->required();
  report->add_option("text", text);
  report->add_option("--attach", attach, "Photo or video file");
  report->add_option("--attachment-kind", attach_kind, "photo|video (default: from extension)");
  report->add_option("--source", source, "gps|network|manual");
  report->add_flag("--anonymous", anonymous);
  report->add_flag("--offline", offline, "Queue locally instead of sending");

  std::uint64_t report_id = 0;
  std::string vote;
  auto* rate = app.add_subcommand("rate", "Support or dispute a report");
  rate->add_option("report_id", report_id)->required();
  rate->add_option("vote", vote, "up|down")->required();

  std::size_t page = 1, page_size = 20;
  auto* feed = app.add_subcommand("feed", "Recent reports, newest first");
  feed->add_option("--page", page);
  feed->add_option("--page-size", page_size);

  std::string bbox, category;
  double cell_size = 0.0;
  auto* map = app.add_subcommand("map", "Pollution map as a grid of validated-report counts");
  map->add_option("--bbox", bbox, "min_lat,min_lon,max_lat,max_lon");
  map->add_option("--cell-size", cell_size, "Cell size in degrees");
  map->add_option("--category", category);

  auto* stats = app.add_subcommand("stats", "Category distribution of validated reports");
  auto* sync = app.add_subcommand("sync", "Send queued offline reports");
  auto* queue = app.add_subcommand("queue", "List the offline queue");

  std::vector<std::string> argv_storage{"civic"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  if (g.config_path.empty()) g.config_path = default_client_config_path();
  ClientConfig cfg = load_client_config(g.config_path);
  if (!g.server.empty()) cfg.server = g.server;

  try {
    ApiClient client(cfg.server, cfg.token);

    if (*reg) {
      const Json profile =
          client.post("/api/v1/auth/register", Json{{"name", name}, {"credential", resolve_credential(credential)}});
      if (g.json) {
        out << profile.dump() << "\n";
      } else {
        out << "registered " << profile.at("display_name").get<std::string>() << " ("
            << profile.at("user_id").get<std::string>() << ")\n";
      }
      return kExitOk;
    }

    if (*login) {
      const Json s =
          client.post("/api/v1/auth/login", Json{{"name", name}, {"credential", resolve_credential(credential)}});
      cfg.token = s.at("token").get<std::string>();
      cfg.name = name;
      save_client_config(g.config_path, cfg);
      if (g.json) {
        out << Json{{"user_id", s.at("user_id")}, {"expiry", s.at("expiry")}}.dump() << "\n";
      } else {
        out << "logged in as " << name << " until " << s.at("expiry").get<std::string>() << "\n";
      }
      return kExitOk;
    }

    if (*report) {
      ReportDraft draft;
      draft.categories = parse_category_list(categories);
      draft.location = GeoPoint{lat, lon, parse_location_source(source)};
      draft.text = text;
      draft.anonymous = anonymous;
      draft.client_time = now_utc();
      std::optional<std::filesystem::path> attachment;
      if (!attach.empty()) {
        attachment = attach;
        std::optional<AttachmentKind> kind;
        if (!attach_kind.empty()) kind = parse_attachment_kind(attach_kind);
        draft.attachment = describe_attachment(*attachment, kind);
      }
      draft.client_key = random_hex(16);
      validate_draft(draft);  // same rules as the server, before any network use

      auto enqueue = [&](const char* why) {
        Spool spool(spool_dir(g, cfg));
        const std::size_t position = spool.enqueue(draft, attachment);
        if (g.json) {
          out << Json{{"queued", true}, {"position", position}}.dump() << "\n";
        } else {
          out << why << "queued at position " << position << "\n";
        }
        return kExitOk;
      };
      if (offline) return enqueue("");

      Json created;
      try {
        created = client.post("/api/v1/reports", draft_request(draft, attachment));
      } catch (const NetworkError&) {
        return enqueue("server unreachable; ");
      }
      if (g.json) {
        out << created.dump() << "\n";
      } else {
        out << "report " << created.at("report_id").get<std::uint64_t>() << " "
            << created.at("status").get<std::string>() << "\n";
      }
      return kExitOk;
    }

    if (*rate) {
      const Json s = client.post("/api/v1/reports/" + std::to_string(report_id) + "/ratings",
                                 Json{{"vote", parse_vote_label(vote)}});
      if (g.json) {
        out << s.dump() << "\n";
      } else {
        char score[32];
        std::snprintf(score, sizeof(score), "%.3f", s.at("score").get<double>());
        out << "report " << report_id << ": score " << score << ", " << s.at("status").get<std::string>() << "\n";
      }
      return kExitOk;
    }

    if (*feed) {
      const Json f = client.get("/api/v1/feed?page=" + std::to_string(page) + "&page_size=" + std::to_string(page_size));
      if (g.json) {
        out << f.dump() << "\n";
      } else if (f.at("reports").empty()) {
        out << "no reports\n";
      } else {
        for (const Json& r : f.at("reports")) print_report_line(out, r);
      }
      return kExitOk;
    }

    if (*map) {
      std::string query = "/api/v1/map?";
      if (!bbox.empty()) {
        std::stringstream ss(bbox);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, ',')) parts.push_back(part);
        if (parts.size() != 4) throw Error(ErrorCode::BadBBox, "--bbox needs min_lat,min_lon,max_lat,max_lon");
        query += "min_lat=" + parts[0] + "&min_lon=" + parts[1] + "&max_lat=" + parts[2] + "&max_lon=" + parts[3] + "&";
      }
      if (cell_size > 0.0) {
        char cs[32];
        std::snprintf(cs, sizeof(cs), "%.10g", cell_size);
        query += std::string("cell_size=") + cs + "&";
      }
      if (!category.empty()) query += "category=" + std::string(to_string(parse_category(category)));
      const Json m = client.get(query);
      if (g.json) {
        out << m.dump() << "\n";
      } else {
        out << render_map_grid(m.at("cells"));
      }
      return kExitOk;
    }

    if (*stats) {
      const Json s = client.get("/api/v1/stats/categories");
      if (g.json) {
        out << s.dump() << "\n";
      } else if (s.at("categories").empty()) {
        out << "no validated reports\n";
      } else {
        out << "validated reports: " << s.at("validated_count").get<std::uint64_t>() << "\n";
        out << "CATEGORY   SHARE\n";
        for (const Json& c : s.at("categories")) {
          char line[64];
          std::snprintf(line, sizeof(line), "%-9s %5.0f%%\n", c.at("category").get<std::string>().c_str(),
                        std::round(c.at("fraction").get<double>() * 100.0));
          out << line;
        }
      }
      return kExitOk;
    }

    if (*sync) {
      Spool spool(spool_dir(g, cfg));
      const auto results = sync_queue(client, spool);
      bool any_error = false;
      Json j = Json::array();
      for (const auto& r : results) {
        any_error = any_error || r.outcome == "error";
        Json e{{"client_key", r.client_key}, {"outcome", r.outcome}};
        if (r.report_id) e["report_id"] = *r.report_id;
        if (r.error_code) e["error"] = {{"code", *r.error_code}, {"message", r.error_message.value_or("")}};
        j.push_back(e);
      }
      if (g.json) {
        out << Json{{"outcomes", j}}.dump() << "\n";
      } else if (results.empty()) {
        out << "nothing to do\n";
      } else {
        for (const auto& r : results) {
          out << r.client_key << " " << r.outcome;
          if (r.report_id) out << " report " << *r.report_id;
          if (r.error_code) out << " " << *r.error_code << ": " << r.error_message.value_or("");
          out << "\n";
        }
      }
      return any_error ? kExitValidation : kExitOk;
    }

    if (*queue) {
      Spool spool(spool_dir(g, cfg));
      const auto entries = spool.entries();
      if (g.json) {
        out << Json(entries).dump() << "\n";
      } else if (entries.empty()) {
        out << "queue is empty\n";
      } else {
        for (const auto& e : entries) {
          out << e.client_key << " " << to_string(e.state) << " " << format_rfc3339(e.queued_at) << " "
              << categories_text(Json(e.draft.categories));
          if (e.report_id) out << " report " << *e.report_id;
          if (e.error_code) out << " " << *e.error_code;
          out << "\n";
        }
      }
      return kExitOk;
    }
  } catch (const NetworkError& e) {
    err << "error: NetworkUnavailable: " << e.what() << "\n";
    return kExitNetwork;
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace civic
