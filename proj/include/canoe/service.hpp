#pragma once

#include "canoe/clock.hpp"
#include "canoe/pipeline.hpp"
#include "canoe/rules.hpp"
#include "canoe/store.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace httplib {
class Server;
}

namespace canoe {

struct ServiceConfig {
  std::filesystem::path data_dir;    // cases/<case_id>/case.json, sessions/<session_id>/...
  std::filesystem::path corpus_dir;  // evidence corpus used by every run
  RuleBook rules;
  PipelineConfig pipeline;
  ScheduleSettings schedule;
  Clock clock;
  std::function<std::unique_ptr<ArgumentBackend>()> make_backend;

  // CANOE_DATA (data dir, default ./canoe-data), CANOE_CORPUS_DIR (default:
  // bundled sample corpus), CANOE_BACKEND (scripted | external) with
  // CANOE_BACKEND_URL / CANOE_BACKEND_TOKEN, CANOE_FIXED_CLOCK.
  static ServiceConfig from_env();
};

// The /v1 HTTP API over a data directory. Requests on different sessions run
// concurrently; requests on one session are serialized.
class Service {
 public:
  explicit Service(ServiceConfig cfg);
  void mount(httplib::Server& server);

  std::filesystem::path session_path(const std::string& session_id) const;
  std::filesystem::path case_path(const std::string& case_id) const;

 private:
  std::shared_ptr<std::mutex> lock_for(const std::string& key);

  ServiceConfig cfg_;
  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

// Blocks serving on host:port until the process is stopped.
void serve(ServiceConfig cfg, const std::string& host, int port);

}  // namespace canoe
