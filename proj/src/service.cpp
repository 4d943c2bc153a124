#include "canoe/service.hpp"

#include "canoe/canonical.hpp"
#include "canoe/error.hpp"
#include "canoe/serialize.hpp"

#include <httplib.h>

#include <cstdlib>
#include <regex>

namespace canoe {

namespace {

constexpr const char* kJson = "application/json";
constexpr const char* kNdjson = "application/x-ndjson";
constexpr const char* kCsv = "text/csv";

const std::regex kIdPattern("[A-Za-z0-9_-][A-Za-z0-9._-]{0,127}");

std::string pretty(const nlohmann::json& j) { return dump_canonical(j, 2) + "\n"; }

void send_error(httplib::Response& res, const Error& e) {
  res.status = http_status(e.code());
  res.set_content(pretty(e.to_json()), kJson);
}

template <typename F>
auto guarded(F&& handler) {
  return [handler = std::forward<F>(handler)](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const nlohmann::json::exception& e) {
      send_error(res, Error(Errc::validation, e.what()));
    } catch (const std::exception& e) {
      send_error(res, Error(Errc::io, e.what()));
    }
  };
}

nlohmann::json body_of(const httplib::Request& req) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::validation, std::string("request body is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::validation, "request body must be a JSON object");
  return j;
}

Role actor_of(const nlohmann::json& body) {
  auto it = body.find("actor");
  if (it == body.end() || !it->is_string()) throw Error(Errc::validation, "mutating requests need an 'actor' field");
  const Role r = parse_role(it->get<std::string>());
  if (!is_human(r)) throw Error(Errc::validation, "actor must be human_reviewer or human_care_planner");
  return r;
}

std::string checked_id(const std::string& id, const char* what) {
  if (!std::regex_match(id, kIdPattern)) throw Error(Errc::validation, std::string("malformed ") + what + " id");
  return id;
}

bool wants(const httplib::Request& req, const char* type) {
  return req.get_header_value("Accept").find(type) != std::string::npos;
}

nlohmann::json degrees_or_null(const ContestationSession& s) {
  return s.degrees_stale() ? nlohmann::json(nullptr) : to_json(s.degrees());
}

}  // namespace

ServiceConfig ServiceConfig::from_env() {
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v == nullptr ? std::string() : std::string(v);
  };
  ServiceConfig cfg;
  cfg.data_dir = env("CANOE_DATA").empty() ? std::filesystem::path("canoe-data") : std::filesystem::path(env("CANOE_DATA"));
  cfg.corpus_dir = env("CANOE_CORPUS_DIR").empty() ? default_sample_dir() / "corpus"
                                                   : std::filesystem::path(env("CANOE_CORPUS_DIR"));
  cfg.rules = RuleBook::load(RuleBook::default_dir());
  cfg.pipeline = default_pipeline_config(cfg.rules);
  cfg.schedule = default_schedule_settings(cfg.rules);
  cfg.clock = clock_from_env();
  const auto kind = env("CANOE_BACKEND").empty() ? BackendKind::scripted : parse_backend_kind(env("CANOE_BACKEND"));
  cfg.pipeline.debate.backend = kind;
  cfg.make_backend = [kind] { return canoe::make_backend(kind); };
  return cfg;
}

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {
  if (!cfg_.clock) cfg_.clock = system_clock();
  if (!cfg_.make_backend) {
    const auto kind = cfg_.pipeline.debate.backend;
    cfg_.make_backend = [kind] { return canoe::make_backend(kind); };
  }
}

std::filesystem::path Service::session_path(const std::string& session_id) const {
  return cfg_.data_dir / "sessions" / checked_id(session_id, "session");
}

std::filesystem::path Service::case_path(const std::string& case_id) const {
  return cfg_.data_dir / "cases" / checked_id(case_id, "case");
}

std::shared_ptr<std::mutex> Service::lock_for(const std::string& key) {
  std::lock_guard<std::mutex> g(locks_mutex_);
  auto& m = locks_[key];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

void Service::mount(httplib::Server& server) {
  auto session_dir = [this](const httplib::Request& req) {
    SessionDir dir(session_path(req.matches[1]));
    if (!dir.exists()) throw Error(Errc::not_found, "no session '" + std::string(req.matches[1]) + "'");
    return dir;
  };
  auto with_session = [this, session_dir](auto fn) {
    return guarded([this, session_dir, fn](const httplib::Request& req, httplib::Response& res) {
      auto dir = session_dir(req);
      auto m = lock_for("session:" + std::string(req.matches[1]));
      std::lock_guard<std::mutex> g(*m);
      fn(dir, req, res);
    });
  };

  server.Get("/v1/health", guarded([](const httplib::Request&, httplib::Response& res) {
               res.set_content(pretty({{"status", "ok"}}), kJson);
             }));

  server.Post("/v1/cases", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto body = body_of(req);
                actor_of(body);
                const auto patient = case_from_json(field::required(body, "case"));
                const auto dir = case_path(patient.case_id);
                auto m = lock_for("case:" + patient.case_id);
                std::lock_guard<std::mutex> g(*m);
                const auto text = pretty(to_json(patient));
                const auto file = dir / "case.json";
                if (std::filesystem::exists(file)) {
                  if (read_text_file(file) != text) {
                    throw Error(Errc::duplicate_id, "case '" + patient.case_id + "' exists with different content");
                  }
                  res.status = 200;
                } else {
                  std::filesystem::create_directories(dir);
                  write_text_file_atomic(file, text);
                  res.status = 201;
                }
                res.set_content(text, kJson);
              }));

  server.Get(R"(/v1/cases/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto file = case_path(req.matches[1]) / "case.json";
               if (!std::filesystem::exists(file)) {
                 throw Error(Errc::not_found, "no case '" + std::string(req.matches[1]) + "'");
               }
               res.set_content(read_text_file(file), kJson);
             }));

  server.Post(R"(/v1/cases/([^/]+)/run)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const std::string case_id = req.matches[1];
                const auto body = body_of(req);
                actor_of(body);
                const auto file = case_path(case_id) / "case.json";
                if (!std::filesystem::exists(file)) throw Error(Errc::not_found, "no case '" + case_id + "'");
                auto config = cfg_.pipeline;
                if (auto it = body.find("config"); it != body.end()) config = pipeline_config_from_json(*it);
                auto m = lock_for("case:" + case_id);
                std::lock_guard<std::mutex> g(*m);
                const auto patient = case_from_json(read_json_file(file));
                int n = 1;
                while (SessionDir(session_path(case_id + "-s" + std::to_string(n))).exists()) ++n;
                const std::string session_id = case_id + "-s" + std::to_string(n);
                const auto corpus = load_corpus(cfg_.corpus_dir);
                auto backend = config.debate.backend == cfg_.pipeline.debate.backend ? cfg_.make_backend()
                                                                                     : make_backend(config.debate.backend);
                auto out = run_session(session_path(session_id), session_id, patient, corpus, cfg_.rules, config,
                                       *backend, cfg_.schedule);
                const auto session = out.dir.load();
                res.status = 201;
                res.set_content(pretty({{"session", session_summary(session)},
                                        {"team", team_to_json(out.result.complexity, out.result.roster,
                                                              out.result.warnings)},
                                        {"degrees", degrees_or_null(session)}}),
                                kJson);
              }));

  server.Get(R"(/v1/sessions/([^/]+))",
             with_session([](const SessionDir& dir, const httplib::Request&, httplib::Response& res) {
               const auto s = dir.load();
               res.set_content(pretty({{"session", session_summary(s)},
                                       {"team", read_json_file(dir.path() / "team.json")},
                                       {"degrees", degrees_or_null(s)}}),
                               kJson);
             }));

  server.Get(R"(/v1/sessions/([^/]+)/graph)",
             with_session([](const SessionDir& dir, const httplib::Request&, httplib::Response& res) {
               res.set_content(serialize_graph(dir.load().graph()), kJson);
             }));

  server.Get(R"(/v1/sessions/([^/]+)/degrees)",
             with_session([](const SessionDir& dir, const httplib::Request&, httplib::Response& res) {
               res.set_content(degrees_file(dir.load()), kJson);
             }));

  server.Get(R"(/v1/sessions/([^/]+)/participation)",
             with_session([](const SessionDir& dir, const httplib::Request& req, httplib::Response& res) {
               const auto s = dir.load();
               if (wants(req, kCsv)) {
                 res.set_content(participation_csv(s.graph()), kCsv);
               } else {
                 res.set_content(pretty(participation_json(s.graph())), kJson);
               }
             }));

  server.Get(R"(/v1/sessions/([^/]+)/dot)",
             with_session([](const SessionDir& dir, const httplib::Request&, httplib::Response& res) {
               const auto s = dir.load();
               res.set_content(to_dot(s.graph(), s.degrees_stale() ? nullptr : &s.degrees()), "text/vnd.graphviz");
             }));

  server.Post(R"(/v1/sessions/([^/]+)/edits)",
              with_session([this](const SessionDir& dir, const httplib::Request& req, httplib::Response& res) {
                const auto action = edit_action_from_json(body_of(req));
                const auto s = session_edit(dir, action, cfg_.clock);
                res.set_content(pretty({{"entry", to_json(s.audit().back())}, {"session", session_summary(s)}}),
                                kJson);
              }));

  server.Post(R"(/v1/sessions/([^/]+)/revalidate)",
              with_session([this](const SessionDir& dir, const httplib::Request& req, httplib::Response& res) {
                const auto s = session_revalidate(dir, actor_of(body_of(req)), cfg_.clock);
                res.set_content(pretty({{"degrees", to_json(s.degrees())}, {"session", session_summary(s)}}), kJson);
              }));

  server.Post(R"(/v1/sessions/([^/]+)/approve)",
              with_session([this](const SessionDir& dir, const httplib::Request& req, httplib::Response& res) {
                const auto body = body_of(req);
                bool force = false;
                if (auto it = body.find("force"); it != body.end()) {
                  if (!it->is_boolean()) throw Error(Errc::validation, "'force' must be a boolean");
                  force = it->get<bool>();
                }
                const auto s = session_approve(dir, actor_of(body), force, cfg_.clock);
                res.set_content(pretty({{"entry", to_json(s.audit().back())}, {"session", session_summary(s)}}),
                                kJson);
              }));

  server.Get(R"(/v1/sessions/([^/]+)/audit)",
             with_session([](const SessionDir& dir, const httplib::Request& req, httplib::Response& res) {
               const auto s = dir.load();
               if (wants(req, kCsv)) {
                 res.set_content(audit_csv(s.audit()), kCsv);
               } else {
                 res.set_content(read_text_file(dir.path() / "audit.jsonl"), kNdjson);
               }
             }));

  server.Post(R"(/v1/sessions/([^/]+)/plan)",
              with_session([this](const SessionDir& dir, const httplib::Request& req, httplib::Response& res) {
                session_plan(dir, actor_of(body_of(req)), cfg_.clock);
                res.status = 201;
                res.set_content(read_text_file(dir.path() / "plan.json"), kJson);
              }));

  server.Get(R"(/v1/sessions/([^/]+)/plan)",
             with_session([](const SessionDir& dir, const httplib::Request& req, httplib::Response& res) {
               const auto s = dir.load();
               if (s.phase() != Phase::planned) {
                 throw Error(Errc::not_found, "session '" + std::string(req.matches[1]) + "' has no plan yet");
               }
               res.set_content(read_text_file(dir.path() / "plan.json"), kJson);
             }));
}

void serve(ServiceConfig cfg, const std::string& host, int port) {
  httplib::Server server;
  Service service(std::move(cfg));
  service.mount(server);
  if (!server.listen(host, port)) {
    throw Error(Errc::io, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace canoe
