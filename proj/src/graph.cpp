#include "canoe/graph.hpp"

#include "canoe/canonical.hpp"
#include "canoe/error.hpp"

#include <algorithm>

namespace canoe {

const Argument& ArgumentGraph::argument(const std::string& id) const {
  auto it = arguments_.find(id);
  if (it == arguments_.end()) throw Error(Errc::unknown_argument, "unknown argument '" + id + "'");
  return it->second;
}

Argument& ArgumentGraph::mutable_argument(const std::string& id) {
  auto it = arguments_.find(id);
  if (it == arguments_.end()) throw Error(Errc::unknown_argument, "unknown argument '" + id + "'");
  return it->second;
}

const CareOption& ArgumentGraph::option(const std::string& id) const {
  auto it = options_.find(id);
  if (it == options_.end()) throw Error(Errc::unknown_option, "unknown option '" + id + "'");
  return it->second;
}

void ArgumentGraph::add_option(CareOption opt) {
  if (opt.option_id.empty()) throw Error(Errc::validation, "option_id must be nonempty");
  if (options_.count(opt.option_id) != 0) {
    throw Error(Errc::duplicate_id, "duplicate option '" + opt.option_id + "'");
  }
  auto id = opt.option_id;
  options_.emplace(std::move(id), std::move(opt));
}

void ArgumentGraph::add_argument(Argument arg) {
  if (arg.arg_id.empty()) throw Error(Errc::validation, "arg_id must be nonempty");
  if (arguments_.count(arg.arg_id) != 0) {
    throw Error(Errc::duplicate_id, "duplicate argument '" + arg.arg_id + "'");
  }
  if (options_.count(arg.target_option) == 0) {
    throw Error(Errc::unknown_option, "argument '" + arg.arg_id + "' targets unknown option '" +
                                          arg.target_option + "'");
  }
  if (arg.content.empty()) throw Error(Errc::validation, "argument content must be nonempty");
  if (!(arg.tau >= 0.0 && arg.tau <= 1.0)) throw Error(Errc::validation, "tau must lie in [0,1]");
  if (!is_provider(arg.role)) {
    throw Error(Errc::validation, "argument role must be a provider role, got " + std::string(to_string(arg.role)));
  }
  if (arg.status == ArgStatus::rejected) throw Error(Errc::validation, "rejected arguments are not stored");
  arg.tau = canonical_real(arg.tau);
  auto id = arg.arg_id;
  arguments_.emplace(std::move(id), std::move(arg));
}

std::vector<Relation> ArgumentGraph::remove_argument(const std::string& id) {
  auto it = arguments_.find(id);
  if (it == arguments_.end()) throw Error(Errc::unknown_argument, "unknown argument '" + id + "'");
  std::vector<Relation> removed;
  for (auto rit = relations_.begin(); rit != relations_.end();) {
    if (rit->second.source == id || rit->second.target == id) {
      removed.push_back(rit->second);
      rit = relations_.erase(rit);
    } else {
      ++rit;
    }
  }
  arguments_.erase(it);
  return removed;
}

void ArgumentGraph::add_relation(Relation rel) {
  if (!has_argument(rel.source)) throw Error(Errc::unknown_argument, "unknown relation source '" + rel.source + "'");
  if (!has_argument(rel.target)) throw Error(Errc::unknown_argument, "unknown relation target '" + rel.target + "'");
  if (rel.source == rel.target) throw Error(Errc::self_loop, "self loop on '" + rel.source + "'");
  if (!(rel.weight >= 0.0)) throw Error(Errc::negative_weight, "relation weight must be >= 0");
  RelationKey key{rel.source, rel.target, rel.polarity};
  if (relations_.count(key) != 0) {
    throw Error(Errc::duplicate_relation, "duplicate " + std::string(to_string(rel.polarity)) + " relation " +
                                              rel.source + " -> " + rel.target);
  }
  rel.weight = canonical_real(rel.weight);
  relations_.emplace(std::move(key), std::move(rel));
}

void ArgumentGraph::set_content(const std::string& id, std::string content) {
  if (content.empty()) throw Error(Errc::validation, "argument content must be nonempty");
  mutable_argument(id).content = std::move(content);
}

void ArgumentGraph::set_tau(const std::string& id, double tau, bool pinned) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(Errc::validation, "tau must lie in [0,1]");
  auto& arg = mutable_argument(id);
  arg.tau = canonical_real(tau);
  arg.tau_pinned = pinned;
}

void ArgumentGraph::set_status(const std::string& id, ArgStatus status) {
  if (status == ArgStatus::rejected) throw Error(Errc::validation, "use remove_argument to reject");
  mutable_argument(id).status = status;
}

std::vector<Relation> ArgumentGraph::incoming(const std::string& id) const {
  std::vector<Relation> out;
  for (const auto& [key, rel] : relations_) {
    if (rel.target == id) out.push_back(rel);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Relation& a, const Relation& b) { return a.source < b.source; });
  return out;
}

std::map<Role, RoleCounts> participation_summary(const ArgumentGraph& graph) {
  std::map<Role, RoleCounts> summary;
  for (Role r : kProviderRoles) summary[r] = {};
  for (const auto& [id, arg] : graph.arguments()) {
    auto& counts = summary[arg.role];
    if (arg.stance == Stance::support) {
      ++counts.support_count;
    } else {
      ++counts.challenge_count;
    }
  }
  return summary;
}

}  // namespace canoe
