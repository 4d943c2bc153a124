#pragma once

#include "canoe/types.hpp"

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace canoe {

// The argument pool together with its support/attack relations and the care
// options the arguments target. Iteration over arguments, options and
// relations is always in lexicographic id order; downstream numerics rely on
// that order being canonical.
//
// Invariants maintained by every mutator:
//   - every argument targets an existing option;
//   - every relation endpoint is a live argument, no self loops, no duplicate
//     (source, target, polarity) triple, weight >= 0.
// Real-valued fields (tau, weight) are stored at the canonical 9-significant-
// digit precision so that a save/load cycle is the identity.
class ArgumentGraph {
 public:
  using RelationKey = std::tuple<std::string, std::string, Polarity>;

  const std::map<std::string, Argument>& arguments() const { return arguments_; }
  const std::map<std::string, CareOption>& options() const { return options_; }
  const std::map<RelationKey, Relation>& relations() const { return relations_; }

  bool has_argument(const std::string& id) const { return arguments_.count(id) != 0; }
  bool has_option(const std::string& id) const { return options_.count(id) != 0; }
  const Argument& argument(const std::string& id) const;  // UnknownArgument
  const CareOption& option(const std::string& id) const;  // UnknownOption

  std::size_t size() const { return arguments_.size(); }
  bool empty() const { return arguments_.empty(); }

  // DuplicateId when option_id already exists.
  void add_option(CareOption opt);

  // DuplicateId, UnknownOption. Also rejects empty content and tau outside
  // [0,1] (Errc::validation).
  void add_argument(Argument arg);

  // Removes the argument and every incident relation; returns the removed
  // relations. UnknownArgument.
  std::vector<Relation> remove_argument(const std::string& id);

  // UnknownArgument, SelfLoop, DuplicateRelation, NegativeWeight.
  void add_relation(Relation rel);

  void set_content(const std::string& id, std::string content);
  void set_tau(const std::string& id, double tau, bool pinned);
  void set_status(const std::string& id, ArgStatus status);

  // Relations whose target is `id`, in lexicographic source order.
  std::vector<Relation> incoming(const std::string& id) const;

  friend bool operator==(const ArgumentGraph&, const ArgumentGraph&) = default;

 private:
  Argument& mutable_argument(const std::string& id);

  std::map<std::string, Argument> arguments_;
  std::map<std::string, CareOption> options_;
  std::map<RelationKey, Relation> relations_;
};

struct RoleCounts {
  int support_count = 0;
  int challenge_count = 0;
  friend bool operator==(const RoleCounts&, const RoleCounts&) = default;
};

// Counts live arguments per provider role and stance. Every provider role is
// present in the result, possibly as (0, 0).
std::map<Role, RoleCounts> participation_summary(const ArgumentGraph& graph);

}  // namespace canoe
