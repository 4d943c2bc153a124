// canoe: command-line driver for the care-planning engine.
#include "canoe/canonical.hpp"
#include "canoe/clock.hpp"
#include "canoe/error.hpp"
#include "canoe/plangen.hpp"
#include "canoe/semantics.hpp"
#include "canoe/serialize.hpp"
#include "canoe/service.hpp"
#include "canoe/store.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

namespace fs = std::filesystem;
using namespace canoe;

namespace {

void error_line(const nlohmann::json& err) { std::cerr << dump_canonical({{"error", err}}) << "\n"; }

int fail(const Error& e) {
  std::cerr << "canoe: " << e.what() << "\n";
  error_line(e.to_json());
  return exit_code(e.code());
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void print_scores(const ContestationSession& s) {
  if (s.degrees_stale()) {
    std::cout << "degrees stale: revalidate to refresh option scores\n";
    return;
  }
  for (const auto& [id, f] : s.degrees().option_scores) {
    std::cout << id << "\t" << fmt(f) << "\t" << to_string(tier_option(f, s.config().tiers)) << "\n";
  }
}

Role parse_actor(const std::string& name) {
  const Role r = parse_role(name);
  if (!is_human(r)) throw Error(Errc::validation, "--actor must be human_reviewer or human_care_planner");
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"canoe - contestable care planning over bipolar argumentation"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "assess, recruit, retrieve, debate and solve; writes a session directory");
  std::string case_file, corpus_dir, out_dir, backend = "scripted", config_file, calendar_file, session_id;
  int rounds = 1, top_k = 8;
  bool linker = false;
  run->add_option("case", case_file, "case file")->required();
  run->add_option("--corpus", corpus_dir, "evidence corpus directory")->required();
  run->add_option("--out", out_dir, "session directory to create")->required();
  run->add_option("--rounds", rounds, "debate rounds");
  run->add_option("--backend", backend, "scripted | external")->check(CLI::IsMember({"scripted", "external"}));
  run->add_option("--top-k", top_k, "documents retrieved");
  run->add_flag("--linker", linker, "link co-citing arguments");
  run->add_option("--config", config_file, "full pipeline config file (overrides the flags above)");
  run->add_option("--calendar", calendar_file, "calendar used by `plan`");
  run->add_option("--session-id", session_id, "defaults to <case_id>-s1");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve a graph file and write its degrees file");
  std::string graph_file, degrees_out, squash_name = "clip";
  SolverConfig solver;
  AggregationConfig agg;
  solve_cmd->add_option("graph", graph_file, "graph file")->required();
  solve_cmd->add_option("--damping", solver.damping);
  solve_cmd->add_option("--tolerance", solver.tolerance);
  solve_cmd->add_option("--max-iter", solver.max_iterations);
  solve_cmd->add_option("--squash", squash_name)->check(CLI::IsMember({"clip", "logistic"}));
  solve_cmd->add_option("--logistic-k", solver.logistic_k);
  solve_cmd->add_option("--temperature", agg.temperature);
  solve_cmd->add_option("--out", degrees_out, "defaults to <graph>.degrees.json");

  // session commands
  std::string session_dir, action_file, actor, format, dot_out, port_host = "127.0.0.1", data_dir;
  bool force = false;
  int port = 0;
  auto* edit = app.add_subcommand("edit", "apply one edit action");
  edit->add_option("session", session_dir)->required();
  edit->add_option("--action", action_file, "edit action file")->required();

  auto* reval = app.add_subcommand("revalidate", "re-solve the edited graph");
  reval->add_option("session", session_dir)->required();
  reval->add_option("--actor", actor)->default_val("human_reviewer");

  auto* approve = app.add_subcommand("approve", "care-planner approval");
  approve->add_option("session", session_dir)->required();
  approve->add_flag("--force", force, "bulk-accept pending arguments");
  approve->add_option("--actor", actor)->default_val("human_care_planner");

  auto* plan = app.add_subcommand("plan", "synthesize and schedule the care plan");
  plan->add_option("session", session_dir)->required();
  plan->add_option("--actor", actor)->default_val("human_care_planner");

  auto* replay_cmd = app.add_subcommand("replay", "replay the audit log and verify the session files");
  replay_cmd->add_option("session", session_dir)->required();

  auto* dot = app.add_subcommand("export-dot", "argument graph in DOT format");
  dot->add_option("session", session_dir)->required();
  dot->add_option("--out", dot_out);

  auto* audit = app.add_subcommand("export-audit", "audit log as csv or jsonl");
  audit->add_option("session", session_dir)->required();
  audit->add_option("--format", format)->default_val("csv")->check(CLI::IsMember({"csv", "jsonl"}));

  auto* part = app.add_subcommand("export-participation", "participation summary as csv or json");
  part->add_option("session", session_dir)->required();
  part->add_option("--format", format)->default_val("csv")->check(CLI::IsMember({"csv", "json"}));

  auto* serve_cmd = app.add_subcommand("serve", "start the HTTP service");
  serve_cmd->add_option("--port", port, "defaults to $CANOE_PORT or 8080");
  serve_cmd->add_option("--data", data_dir, "defaults to $CANOE_DATA or ./canoe-data");
  serve_cmd->add_option("--host", port_host);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc != 0) {
      error_line({{"code", "validation"}, {"reason", "Usage"}, {"message", e.what()}, {"detail", nlohmann::json::object()}});
      return 2;
    }
    return 0;
  }

  const Clock clock = clock_from_env();
  try {
    if (*run) {
      const auto patient = case_from_json(read_json_file(case_file));
      const auto& rules = RuleBook::defaults();
      PipelineConfig cfg = default_pipeline_config(rules);
      if (!config_file.empty()) {
        cfg = pipeline_config_from_json(read_json_file(config_file));
      } else {
        cfg.debate.rounds = rounds;
        cfg.debate.backend = parse_backend_kind(backend);
        cfg.debate.retrieval_top_k = top_k;
        cfg.debate.heuristic_linker = linker;
        validate(cfg.debate);
      }
      auto schedule = default_schedule_settings(rules);
      if (!calendar_file.empty()) schedule.calendar = load_calendar(calendar_file);
      if (session_id.empty()) session_id = patient.case_id + "-s1";
      auto be = make_backend(cfg.debate.backend);
      const auto corpus = load_corpus(corpus_dir);
      auto out = run_session(out_dir, session_id, patient, corpus, rules, cfg, *be, schedule);
      const auto session = out.dir.load();
      std::cout << "session " << session.id() << " (" << out.result.graph.size() << " arguments, complexity "
                << to_string(out.result.complexity.level) << ")\n";
      for (const auto& w : out.result.warnings) std::cerr << "warning: " << w << "\n";
      print_scores(session);
    } else if (*solve_cmd) {
      solver.squash = parse_squash(squash_name);
      validate(solver);
      validate(agg);
      const auto graph = graph_from_json(read_json_file(graph_file));
      const auto degrees = score_all_options(graph, solver, agg);
      if (degrees_out.empty()) {
        fs::path p(graph_file);
        degrees_out = (p.parent_path() / (p.stem().string() + ".degrees.json")).string();
      }
      write_text_file_atomic(degrees_out, dump_canonical(to_json(degrees), 2) + "\n");
      for (const auto& [id, f] : degrees.degrees) std::cout << id << "\t" << fmt(f) << "\n";
    } else if (*edit) {
      const auto action = edit_action_from_json(read_json_file(action_file));
      const auto s = session_edit(SessionDir(session_dir), action, clock);
      std::cout << audit_line(s.audit().back()) << "\n";
    } else if (*reval) {
      const auto s = session_revalidate(SessionDir(session_dir), parse_actor(actor), clock);
      std::cout << "revalidated in " << s.degrees().iterations_used << " iterations\n";
      print_scores(s);
    } else if (*approve) {
      const auto s = session_approve(SessionDir(session_dir), parse_actor(actor), force, clock);
      const auto& bulk = s.audit().back().action.payload.at("bulk_accepted");
      std::cout << "approved";
      if (!bulk.empty()) std::cout << " (force: " << bulk.size() << " pending argument(s) accepted)";
      std::cout << "\n";
    } else if (*plan) {
      const auto p = session_plan(SessionDir(session_dir), parse_actor(actor), clock);
      for (const auto& e : p.entries) {
        std::cout << to_string(e.tier) << "\t" << fmt(e.score) << "\t" << e.option.option_id << "\n";
      }
      for (const auto& t : p.tasks) {
        std::cout << "task " << t.task_id << "\t" << t.option_id << "\t" << to_string(t.provider_role) << "\t"
                  << to_string(t.status) << (t.start.empty() ? "" : "\t" + t.start) << "\n";
      }
    } else if (*replay_cmd) {
      const auto s = verify_session(SessionDir(session_dir));
      std::cout << "ok: " << s.audit().size() << " entries replayed, phase " << to_string(s.phase()) << ", graph "
                << graph_hash(s.graph()) << "\n";
    } else if (*dot) {
      const auto s = SessionDir(session_dir).load();
      const auto text = to_dot(s.graph(), s.degrees_stale() ? nullptr : &s.degrees());
      if (dot_out.empty()) {
        std::cout << text;
      } else {
        write_text_file_atomic(dot_out, text);
      }
    } else if (*audit) {
      const SessionDir dir(session_dir);
      if (format == "csv") {
        std::cout << audit_csv(dir.load().audit());
      } else {
        dir.load();
        std::cout << read_text_file(dir.path() / "audit.jsonl");
      }
    } else if (*part) {
      const auto s = SessionDir(session_dir).load();
      if (format == "csv") {
        std::cout << participation_csv(s.graph());
      } else {
        std::cout << dump_canonical(participation_json(s.graph()), 2) << "\n";
      }
    } else if (*serve_cmd) {
      auto cfg = ServiceConfig::from_env();
      if (!data_dir.empty()) cfg.data_dir = data_dir;
      if (port == 0) {
        const char* env = std::getenv("CANOE_PORT");
        port = env != nullptr && *env != '\0' ? std::atoi(env) : 8080;
      }
      std::cerr << "canoe: serving /v1 on " << port_host << ":" << port << " (data " << cfg.data_dir.string() << ")\n";
      serve(std::move(cfg), port_host, port);
    }
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(Error(Errc::io, e.what()));
  }
  return 0;
}
