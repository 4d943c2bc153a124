#pragma once

#include "canoe/error.hpp"
#include "canoe/graph.hpp"
#include "canoe/types.hpp"

#include <map>
#include <span>
#include <string>

namespace canoe {

enum class Squash { clip, logistic };
std::string_view to_string(Squash s);
Squash parse_squash(std::string_view s);

struct SolverConfig {
  Squash squash = Squash::clip;
  double logistic_k = 4.0;
  double damping = 0.5;  // lambda in (0, 1]; 1 is the undamped update
  double tolerance = 1e-6;
  int max_iterations = 10000;
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct AggregationConfig {
  double temperature = 0.25;
  static constexpr double neutral = 0.5;
  static constexpr double span = 0.5;
  friend bool operator==(const AggregationConfig&, const AggregationConfig&) = default;
};

struct ScorerWeights {
  double w_relevance = 0.4;
  double w_consistency = 0.4;
  double w_transparency = 0.2;
  friend bool operator==(const ScorerWeights&, const ScorerWeights&) = default;
};

// Each throws Errc::validation naming the offending parameter.
void validate(const SolverConfig& cfg);
void validate(const AggregationConfig& cfg);
void validate(const ScorerWeights& w);

// Raised when the iteration budget runs out with residual >= tolerance. The
// partial assignment (last iterate, its option scores, the residual) travels
// with the error so it can be shown to reviewers.
class NonConvergence : public Error {
 public:
  explicit NonConvergence(DegreeAssignment partial);
  const DegreeAssignment& partial() const noexcept { return partial_; }

 private:
  DegreeAssignment partial_;
};

// --- intrinsic strength -----------------------------------------------------

struct IntrinsicBreakdown {
  double relevance = 0.0;
  double consistency = 0.0;
  double transparency = 0.0;
  double tau = 0.0;
};

// tau = w_r * relevance + w_c * consistency + w_t * transparency where
//   relevance    = share of the argument's distinct tokens that also occur in
//                  the case conditions, flags or narrative;
//   consistency  = max over cited documents found in `evidence` of
//                  similarity * reliability (0 without citations);
//   transparency = 0.5 * [cites >= 1 document] + 0.5 * min(1, tokens / 30).
IntrinsicBreakdown intrinsic_breakdown(const Argument& arg, const PatientCase& c,
                                       std::span<const EvidenceDoc> evidence, const ScorerWeights& w);
double score_intrinsic(const Argument& arg, const PatientCase& c, std::span<const EvidenceDoc> evidence,
                       const ScorerWeights& w);

// --- degrees ------------------------------------------------------------------

double squash(double v, const SolverConfig& cfg);

// I(x, f) = sum of alpha * f(y) over supporters minus sum of beta * f(y) over
// attackers, each sum taken in lexicographic source order.
// UnknownArgument when `arg_id` is not in the graph; Errc::validation when a
// source has no degree.
double influence(const std::string& arg_id, const ArgumentGraph& graph,
                 const std::map<std::string, double>& degrees);

// Synchronous fixed-point iteration from f0 = tau:
//   f_{t+1}(x) = (1 - lambda) f_t(x) + lambda * squash(tau(x) + I(x, f_t))
// stopping once max_x |f_{t+1}(x) - f_t(x)| < tolerance. On acyclic relation
// graphs no oscillation is possible and the undamped update (lambda = 1) is
// used; it reaches the exact fixed point after depth + 1 sweeps. Only
// `degrees`, `iterations_used` and `residual` are filled.
DegreeAssignment solve(const ArgumentGraph& graph, const SolverConfig& cfg);

bool is_acyclic(const ArgumentGraph& graph);

// Soft-max of a set of degrees: sum v exp(v/T) / sum exp(v/T), 0 for the empty set.
double soft_max(std::span<const double> values, double temperature);

// F = clip(0.5 + 0.5 * (smax(support degrees) - smax(challenge degrees))).
// UnknownOption; Errc::validation when a degree is missing.
double aggregate_option(const std::string& option_id, const ArgumentGraph& graph,
                        const std::map<std::string, double>& degrees, const AggregationConfig& agg);

// solve followed by aggregate_option for every option. A NonConvergence
// thrown here carries option scores of the partial iterate as well.
DegreeAssignment score_all_options(const ArgumentGraph& graph, const SolverConfig& cfg,
                                   const AggregationConfig& agg);

}  // namespace canoe
