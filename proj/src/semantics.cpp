#include "canoe/semantics.hpp"

#include "canoe/text.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

namespace canoe {

std::string_view to_string(Squash s) { return s == Squash::clip ? "clip" : "logistic"; }

Squash parse_squash(std::string_view s) {
  if (s == "clip") return Squash::clip;
  if (s == "logistic") return Squash::logistic;
  throw Error(Errc::validation, "unknown squash '" + std::string(s) + "'");
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw Error(Errc::validation, "damping must lie in (0,1]");
  if (!(cfg.tolerance > 0.0)) throw Error(Errc::validation, "tolerance must be > 0");
  if (cfg.max_iterations < 1) throw Error(Errc::validation, "max_iterations must be >= 1");
  if (!(cfg.logistic_k > 0.0)) throw Error(Errc::validation, "logistic_k must be > 0");
}

void validate(const AggregationConfig& cfg) {
  if (!(cfg.temperature > 0.0)) throw Error(Errc::validation, "temperature must be > 0");
}

void validate(const ScorerWeights& w) {
  if (w.w_relevance < 0 || w.w_consistency < 0 || w.w_transparency < 0) {
    throw Error(Errc::validation, "scorer weights must be >= 0");
  }
  if (std::abs(w.w_relevance + w.w_consistency + w.w_transparency - 1.0) > 1e-9) {
    throw Error(Errc::validation, "scorer weights must sum to 1");
  }
}

NonConvergence::NonConvergence(DegreeAssignment partial)
    : Error(Errc::non_convergence,
            "solver did not converge within " + std::to_string(partial.iterations_used) + " iterations",
            {{"residual", partial.residual}, {"iterations_used", partial.iterations_used}}),
      partial_(std::move(partial)) {}

// --- intrinsic strength -------------------------------------------------------

IntrinsicBreakdown intrinsic_breakdown(const Argument& arg, const PatientCase& c,
                                       std::span<const EvidenceDoc> evidence, const ScorerWeights& w) {
  validate(w);
  IntrinsicBreakdown b;

  const auto content_tokens = text::tokenize(arg.content);
  const std::set<std::string> arg_set(content_tokens.begin(), content_tokens.end());
  std::set<std::string> case_set = text::token_set(c.narrative);
  for (const auto& cond : c.conditions) {
    auto t = text::token_set(cond);
    case_set.insert(t.begin(), t.end());
  }
  for (Flag f : c.flags) {
    auto t = text::token_set(to_string(f));
    case_set.insert(t.begin(), t.end());
  }
  b.relevance = text::overlap_ratio(arg_set, case_set);

  for (const auto& doc_id : arg.cited_evidence) {
    for (const auto& doc : evidence) {
      if (doc.doc_id == doc_id) b.consistency = std::max(b.consistency, doc.similarity * doc.reliability);
    }
  }

  const double citation_part = arg.cited_evidence.empty() ? 0.0 : 0.5;
  b.transparency = citation_part + 0.5 * std::min(1.0, static_cast<double>(content_tokens.size()) / 30.0);

  b.tau = w.w_relevance * b.relevance + w.w_consistency * b.consistency + w.w_transparency * b.transparency;
  b.tau = std::clamp(b.tau, 0.0, 1.0);
  return b;
}

double score_intrinsic(const Argument& arg, const PatientCase& c, std::span<const EvidenceDoc> evidence,
                       const ScorerWeights& w) {
  return intrinsic_breakdown(arg, c, evidence, w).tau;
}

// --- degrees --------------------------------------------------------------------

double squash(double v, const SolverConfig& cfg) {
  if (cfg.squash == Squash::clip) return std::clamp(v, 0.0, 1.0);
  return 1.0 / (1.0 + std::exp(-cfg.logistic_k * (v - 0.5)));
}

double influence(const std::string& arg_id, const ArgumentGraph& graph,
                 const std::map<std::string, double>& degrees) {
  (void)graph.argument(arg_id);
  double support = 0.0;
  double attack = 0.0;
  for (const auto& rel : graph.incoming(arg_id)) {
    auto it = degrees.find(rel.source);
    if (it == degrees.end()) throw Error(Errc::validation, "no degree for argument '" + rel.source + "'");
    if (rel.polarity == Polarity::support) {
      support += rel.weight * it->second;
    } else {
      attack += rel.weight * it->second;
    }
  }
  return support - attack;
}

namespace {

struct Edge {
  std::size_t source;
  double weight;
};

// Dense view of the graph in canonical order.
struct IndexedGraph {
  std::vector<std::string> ids;
  std::vector<double> tau;
  std::vector<std::vector<Edge>> supporters;  // per target, ascending source id
  std::vector<std::vector<Edge>> attackers;

  explicit IndexedGraph(const ArgumentGraph& g) {
    std::map<std::string, std::size_t> index;
    for (const auto& [id, arg] : g.arguments()) {
      index.emplace(id, ids.size());
      ids.push_back(id);
      tau.push_back(arg.tau);
    }
    supporters.resize(ids.size());
    attackers.resize(ids.size());
    // Relations are keyed (source, target, polarity), so each per-target list
    // is filled in ascending source order.
    for (const auto& [key, rel] : g.relations()) {
      const Edge e{index.at(rel.source), rel.weight};
      auto& list = rel.polarity == Polarity::support ? supporters : attackers;
      list[index.at(rel.target)].push_back(e);
    }
  }

  double influence(std::size_t x, const std::vector<double>& f) const {
    double support = 0.0;
    for (const auto& e : supporters[x]) support += e.weight * f[e.source];
    double attack = 0.0;
    for (const auto& e : attackers[x]) attack += e.weight * f[e.source];
    return support - attack;
  }
};

DegreeAssignment make_assignment(const IndexedGraph& ig, const std::vector<double>& f, int iterations,
                                 double residual) {
  DegreeAssignment d;
  for (std::size_t i = 0; i < ig.ids.size(); ++i) d.degrees.emplace(ig.ids[i], f[i]);
  d.iterations_used = iterations;
  d.residual = residual;
  return d;
}

}  // namespace

bool is_acyclic(const ArgumentGraph& graph) {
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [id, arg] : graph.arguments()) indegree[id] = 0;
  for (const auto& [key, rel] : graph.relations()) {
    ++indegree[rel.target];
    out[rel.source].push_back(rel.target);
  }
  std::deque<std::string> ready;
  for (const auto& [id, d] : indegree) {
    if (d == 0) ready.push_back(id);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const auto id = ready.front();
    ready.pop_front();
    ++visited;
    for (const auto& t : out[id]) {
      if (--indegree[t] == 0) ready.push_back(t);
    }
  }
  return visited == indegree.size();
}

DegreeAssignment solve(const ArgumentGraph& graph, const SolverConfig& cfg) {
  validate(cfg);
  const IndexedGraph ig(graph);
  const std::size_t n = ig.ids.size();
  const double lambda = is_acyclic(graph) ? 1.0 : cfg.damping;

  std::vector<double> f = ig.tau;
  std::vector<double> next(n);
  double residual = 0.0;
  if (n == 0) return make_assignment(ig, f, 0, 0.0);

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    residual = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      const double target = squash(ig.tau[x] + ig.influence(x, f), cfg);
      next[x] = lambda == 1.0 ? target : (1.0 - lambda) * f[x] + lambda * target;
      residual = std::max(residual, std::abs(next[x] - f[x]));
    }
    f.swap(next);
    if (residual < cfg.tolerance) return make_assignment(ig, f, iter, residual);
  }
  throw NonConvergence(make_assignment(ig, f, cfg.max_iterations, residual));
}

double soft_max(std::span<const double> values, double temperature) {
  if (values.empty()) return 0.0;
  const double peak = *std::max_element(values.begin(), values.end());
  double num = 0.0;
  double den = 0.0;
  for (double v : values) {
    const double w = std::exp((v - peak) / temperature);
    num += v * w;
    den += w;
  }
  return num / den;
}

double aggregate_option(const std::string& option_id, const ArgumentGraph& graph,
                        const std::map<std::string, double>& degrees, const AggregationConfig& agg) {
  validate(agg);
  (void)graph.option(option_id);
  std::vector<double> support;
  std::vector<double> challenge;
  for (const auto& [id, arg] : graph.arguments()) {
    if (arg.target_option != option_id) continue;
    auto it = degrees.find(id);
    if (it == degrees.end()) throw Error(Errc::validation, "no degree for argument '" + id + "'");
    (arg.stance == Stance::support ? support : challenge).push_back(it->second);
  }
  const double diff = soft_max(support, agg.temperature) - soft_max(challenge, agg.temperature);
  return std::clamp(AggregationConfig::neutral + AggregationConfig::span * diff, 0.0, 1.0);
}

DegreeAssignment score_all_options(const ArgumentGraph& graph, const SolverConfig& cfg,
                                   const AggregationConfig& agg) {
  validate(agg);
  auto fill_scores = [&](DegreeAssignment& d) {
    for (const auto& [id, opt] : graph.options()) d.option_scores[id] = aggregate_option(id, graph, d.degrees, agg);
  };
  try {
    auto d = solve(graph, cfg);
    fill_scores(d);
    return d;
  } catch (const NonConvergence& e) {
    auto partial = e.partial();
    fill_scores(partial);
    throw NonConvergence(std::move(partial));
  }
}

}  // namespace canoe
