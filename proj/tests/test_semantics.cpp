#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <functional>
#include <set>

using namespace canoe;
using namespace canoe::test;
using Catch::Approx;

namespace {

// Independent soft-max: sum v e^(v/T) / sum e^(v/T).
double oracle_smax(const std::vector<double>& v, double t) {
  if (v.empty()) return 0.0;
  double num = 0, den = 0;
  for (double x : v) {
    num += x * std::exp(x / t);
    den += std::exp(x / t);
  }
  return num / den;
}

double oracle_option(const ArgumentGraph& g, const std::map<std::string, double>& f, const std::string& o, double t) {
  std::vector<double> sup, ch;
  for (const auto& [id, a] : g.arguments()) {
    if (a.target_option != o) continue;
    (a.stance == Stance::support ? sup : ch).push_back(f.at(id));
  }
  return std::clamp(0.5 + 0.5 * (oracle_smax(sup, t) - oracle_smax(ch, t)), 0.0, 1.0);
}

std::set<std::string> descendants(const ArgumentGraph& g, const std::string& x) {
  std::set<std::string> seen{x};
  std::vector<std::string> stack{x};
  while (!stack.empty()) {
    const auto cur = stack.back();
    stack.pop_back();
    for (const auto& [key, r] : g.relations()) {
      if (r.source == cur && seen.insert(r.target).second) stack.push_back(r.target);
    }
  }
  return seen;
}

}  // namespace

TEST_CASE("solve: two-node support and attack fixtures", "[semantics][fixture]") {
  const auto sup = solve(two_node(Polarity::support), {});
  CHECK(sup.degrees.at("a") == Approx(0.5).margin(1e-12));
  CHECK(sup.degrees.at("b") == Approx(0.65).margin(1e-12));

  const auto att = solve(two_node(Polarity::attack), {});
  CHECK(att.degrees.at("a") == Approx(0.5).margin(1e-12));
  CHECK(att.degrees.at("b") == Approx(0.15).margin(1e-12));
}

TEST_CASE("solve: mutual-support cycle converges to tau / (1 - alpha)", "[semantics][fixture]") {
  // f = 0.2 + 0.5 f  =>  f = 0.4
  SolverConfig tight;
  tight.tolerance = 1e-10;
  const auto d = solve(mutual_support(), tight);
  CHECK(d.degrees.at("a") == Approx(0.4).margin(1e-6));
  CHECK(d.degrees.at("b") == Approx(0.4).margin(1e-6));
  CHECK(d.residual < 1e-10);

  // Default tolerance stops on step size; the damped map contracts by 0.75, so
  // the error is bounded by 3 * tolerance.
  const auto loose = solve(mutual_support(), {});
  CHECK(std::abs(loose.degrees.at("a") - 0.4) <= 3e-6);
  CHECK(loose.residual < 1e-6);
}

TEST_CASE("solve: undamped attack 2-cycle oscillates and reports NonConvergence", "[semantics]") {
  ArgumentGraph g;
  g.add_option({"o1", "option", "", Category::coordination});
  g.add_argument({"a", "first", Stance::support, Role::general_practitioner, "o1", {}, 1.0});
  g.add_argument({"b", "second", Stance::challenge, Role::registered_nurse, "o1", {}, 1.0});
  g.add_relation({"a", "b", Polarity::attack, 1.0});
  g.add_relation({"b", "a", Polarity::attack, 1.0});
  SolverConfig cfg;
  cfg.damping = 1.0;
  cfg.max_iterations = 50;
  try {
    score_all_options(g, cfg, {});
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.code() == Errc::non_convergence);
    CHECK(e.partial().iterations_used == 50);
    CHECK(e.partial().residual == Approx(1.0));
    CHECK(e.partial().option_scores.count("o1") == 1);
    CHECK(e.detail().at("residual").get<double>() == Approx(1.0));
  }
  // Damping settles the same cycle.
  cfg.damping = 0.5;
  cfg.max_iterations = 10000;
  const auto d = solve(g, cfg);
  CHECK(d.residual < cfg.tolerance);
  CHECK(d.degrees.at("a") == Approx(0.5).margin(1e-5));
}

TEST_CASE("solve: tiny budget on a cycle raises", "[semantics]") {
  SolverConfig cfg;
  cfg.max_iterations = 3;
  CHECK_THROWS_AS(solve(mutual_support(), cfg), NonConvergence);
}

TEST_CASE("solve: graph without relations keeps tau", "[semantics]") {
  Rng rng(21);
  GraphShape shape;
  shape.max_edges = 0;
  const auto g = random_graph(rng, shape);
  const auto d = solve(g, {});
  CHECK(d.iterations_used <= 2);
  for (const auto& [id, a] : g.arguments()) CHECK(d.degrees.at(id) == a.tau);
}

TEST_CASE("solve: acyclic graphs match topological evaluation", "[semantics][property]") {
  Rng rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = random_graph(rng, {});
    REQUIRE(is_acyclic(g));
    const auto d = solve(g, {});
    REQUIRE(max_abs_diff(d.degrees, topological_degrees(g)) <= 1e-9);
  }
}

TEST_CASE("solve: config validation", "[semantics]") {
  SolverConfig bad;
  bad.damping = 0.0;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = {};
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = {};
  bad.max_iterations = 0;
  CHECK_THROWS_AS(validate(bad), Error);
  AggregationConfig agg;
  agg.temperature = 0.0;
  CHECK_THROWS_AS(validate(agg), Error);
  ScorerWeights w{0.5, 0.5, 0.5};
  CHECK_THROWS_AS(validate(w), Error);
}

TEST_CASE("squash: clip and logistic", "[semantics]") {
  SolverConfig clip;
  CHECK(squash(-0.3, clip) == 0.0);
  CHECK(squash(1.7, clip) == 1.0);
  CHECK(squash(0.42, clip) == 0.42);
  SolverConfig lg;
  lg.squash = Squash::logistic;
  CHECK(squash(0.5, lg) == 0.5);
  CHECK(squash(1.0, lg) == Approx(1.0 / (1.0 + std::exp(-2.0))));
  CHECK(squash(0.0, lg) == Approx(1.0 / (1.0 + std::exp(2.0))));
}

TEST_CASE("influence: signed weighted sum of source degrees", "[semantics]") {
  ArgumentGraph g;
  g.add_option({"o1", "option", "", Category::coordination});
  for (const char* id : {"s1", "s2", "at", "x"}) {
    g.add_argument({id, id, Stance::support, Role::registered_nurse, "o1", {}, 0.5});
  }
  g.add_relation({"s1", "x", Polarity::support, 0.5});
  g.add_relation({"s2", "x", Polarity::support, 0.25});
  g.add_relation({"at", "x", Polarity::attack, 0.75});
  const std::map<std::string, double> f = {{"s1", 0.8}, {"s2", 0.4}, {"at", 0.6}, {"x", 0.0}};
  CHECK(influence("x", g, f) == Approx(0.5 * 0.8 + 0.25 * 0.4 - 0.75 * 0.6));
  CHECK(influence("s1", g, f) == 0.0);
  CHECK_THROWS_AS(influence("nope", g, f), Error);
}

TEST_CASE("soft_max: matches the closed form and interpolates mean and max", "[semantics]") {
  CHECK(soft_max({}, 0.25) == 0.0);
  const std::vector<double> v = {0.2, 0.9, 0.5};
  CHECK(soft_max(v, 0.25) == Approx(oracle_smax(v, 0.25)).epsilon(1e-12));
  CHECK(soft_max(v, 1e-3) == Approx(0.9).margin(1e-9));
  CHECK(soft_max(v, 1e6) == Approx((0.2 + 0.9 + 0.5) / 3).margin(1e-6));
  const std::vector<double> same = {0.3, 0.3};
  CHECK(soft_max(same, 0.25) == Approx(0.3));
}

TEST_CASE("aggregate_option: neutral cases", "[semantics]") {
  ArgumentGraph g;
  g.add_option({"empty", "no arguments", "", Category::coordination});
  g.add_option({"tie", "balanced", "", Category::coordination});
  g.add_argument({"s", "pro", Stance::support, Role::registered_nurse, "tie", {}, 0.7});
  g.add_argument({"c", "con", Stance::challenge, Role::pharmacist, "tie", {}, 0.7});
  const auto d = score_all_options(g, {}, {});
  CHECK(d.option_scores.at("empty") == 0.5);
  CHECK(d.option_scores.at("tie") == 0.5);
  CHECK_THROWS_AS(aggregate_option("missing", g, d.degrees, {}), Error);
}

TEST_CASE("aggregate_option: matches independent formula", "[semantics][property]") {
  Rng rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    GraphShape shape;
    shape.acyclic = coin(rng);
    shape.max_incoming = 0.9;
    shape.options = pick(rng, 1, 3);
    const auto g = random_graph(rng, shape);
    AggregationConfig agg;
    agg.temperature = uniform(rng, 0.05, 2.0);
    const auto d = score_all_options(g, {}, agg);
    for (const auto& [o, score] : d.option_scores) {
      REQUIRE(score == Approx(oracle_option(g, d.degrees, o, agg.temperature)).margin(1e-12));
    }
  }
}

TEST_CASE("boundedness: degrees and scores stay in [0,1]", "[semantics][property]") {
  Rng rng(24);
  for (int trial = 0; trial < 400; ++trial) {
    GraphShape shape;
    shape.acyclic = coin(rng);
    shape.max_weight = 2.0;
    shape.max_incoming = shape.acyclic ? -1 : 0.9;
    SolverConfig cfg;
    cfg.squash = coin(rng) ? Squash::clip : Squash::logistic;
    const auto d = score_all_options(random_graph(rng, shape), cfg, {});
    for (const auto& [k, v] : d.degrees) REQUIRE((v >= 0.0 && v <= 1.0));
    for (const auto& [k, v] : d.option_scores) REQUIRE((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("neutrality: mirrored support and challenge sets score exactly 0.5", "[semantics][property]") {
  Rng rng(25);
  for (int trial = 0; trial < 200; ++trial) {
    ArgumentGraph g;
    g.add_option({"o1", "option", "", Category::coordination});
    const int n = pick(rng, 1, 6);
    for (int i = 0; i < n; ++i) {
      const double tau = uniform(rng, 0, 1);
      g.add_argument({"s" + std::to_string(i), "pro", Stance::support, Role::registered_nurse, "o1", {}, tau});
      g.add_argument({"c" + std::to_string(i), "con", Stance::challenge, Role::pharmacist, "o1", {}, tau});
    }
    REQUIRE(score_all_options(g, {}, {}).option_scores.at("o1") == 0.5);
  }
}

TEST_CASE("monotonicity: one extra support never lowers, one extra attack never raises", "[semantics][property]") {
  Rng rng(26);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    GraphShape shape;
    shape.min_nodes = 2;
    const auto g = random_graph(rng, shape);
    const auto base = solve(g, {});
    const auto x = any_live(rng, g);
    const auto below = descendants(g, x);
    std::vector<std::string> sources;
    for (const auto& [id, a] : g.arguments()) {
      if (!below.count(id)) sources.push_back(id);
    }
    if (sources.empty()) continue;
    const auto y = sources[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(sources.size()) - 1))];
    for (Polarity p : {Polarity::support, Polarity::attack}) {
      auto h = g;
      try {
        h.add_relation({y, x, p, uniform(rng, 0, 0.9)});
      } catch (const Error&) {
        continue;  // the triple already exists
      }
      REQUIRE(is_acyclic(h));
      const double after = solve(h, {}).degrees.at(x);
      if (p == Polarity::support) {
        REQUIRE(after >= base.degrees.at(x));
      } else {
        REQUIRE(after <= base.degrees.at(x));
      }
      ++checked;
    }
  }
  CHECK(checked > 300);
}

TEST_CASE("convergence: incoming weight <= 0.9 converges under defaults", "[semantics][property]") {
  Rng rng(27);
  for (int trial = 0; trial < 200; ++trial) {
    GraphShape shape;
    shape.max_nodes = 15;
    shape.max_edges = 40;
    shape.acyclic = false;
    shape.max_incoming = 0.9;
    const auto d = solve(random_graph(rng, shape), {});
    REQUIRE(d.residual < 1e-6);
    REQUIRE(d.iterations_used <= 10000);
  }
}

TEST_CASE("intrinsic strength: hand-evaluated breakdown", "[semantics]") {
  PatientCase c;
  c.case_id = "t";
  c.conditions = {"diabetes"};
  c.flags = {Flag::lives_alone};
  c.narrative = "Falls at home.";
  const std::vector<EvidenceDoc> docs = {
      {"d1", "x", SourceType::guideline, 0.8, 0.5},
      {"d2", "y", SourceType::case_record, 0.5, 0.9},
  };
  Argument a;
  a.content = "Home falls risk high";
  a.cited_evidence = {"d1", "d2", "d-unknown"};
  const auto b = intrinsic_breakdown(a, c, docs, {});
  // case tokens {diabetes, lives, alone, falls, at, home}; content {home, falls, risk, high}
  CHECK(b.relevance == Approx(0.5));
  CHECK(b.consistency == Approx(0.45));  // max(0.5*0.8, 0.9*0.5)
  CHECK(b.transparency == Approx(0.5 + 0.5 * 4.0 / 30.0));
  CHECK(b.tau == Approx(0.4 * 0.5 + 0.4 * 0.45 + 0.2 * (0.5 + 0.5 * 4.0 / 30.0)));

  Argument bare;
  bare.content = "";
  const auto z = intrinsic_breakdown(bare, c, docs, {});
  CHECK(z.tau == 0.0);
}

TEST_CASE("score_intrinsic: stays in [0,1] on random inputs", "[semantics][property]") {
  Rng rng(28);
  const auto c = sample_case();
  const std::vector<EvidenceDoc> docs = {{"d1", "x", SourceType::guideline, 1.0, 1.0}};
  const std::vector<std::string> words = {"falls", "home", "bathroom", "x", "alone", "stairs", "the"};
  for (int trial = 0; trial < 200; ++trial) {
    Argument a;
    for (int i = pick(rng, 0, 60); i > 0; --i) a.content += words[static_cast<std::size_t>(pick(rng, 0, 6))] + " ";
    if (coin(rng)) a.cited_evidence = {"d1"};
    const double t = score_intrinsic(a, c, docs, {});
    REQUIRE((t >= 0.0 && t <= 1.0));
  }
}

TEST_CASE("degrees file: round-trip", "[semantics]") {
  const auto d = score_all_options(two_node(Polarity::support), {}, {});
  const auto back = degrees_from_json(to_json(d));
  CHECK(back.degrees == d.degrees);
  CHECK(back.option_scores == d.option_scores);
  CHECK(back.iterations_used == d.iterations_used);
}

TEST_CASE("intrinsic strength: full citation, no overlap, long content gives 0.6", "[semantics]") {
  PatientCase c;
  c.case_id = "t";
  c.narrative = "knee";
  const std::vector<EvidenceDoc> docs = {{"d1", "x", SourceType::guideline, 1.0, 1.0}};
  Argument a;
  for (int i = 0; i < 35; ++i) a.content += "word" + std::to_string(i) + " ";
  a.cited_evidence = {"d1"};
  CHECK(score_intrinsic(a, c, docs, {}) == Approx(0.4 * 0 + 0.4 * 1.0 + 0.2 * 1.0));
}

TEST_CASE("influence: one supporter and one attacker", "[semantics]") {
  ArgumentGraph g;
  g.add_option({"o1", "option", "", Category::coordination});
  for (const char* id : {"x", "y", "z"}) g.add_argument({id, id, Stance::support, Role::pharmacist, "o1", {}, 0.5});
  g.add_relation({"y", "x", Polarity::support, 0.5});
  g.add_relation({"z", "x", Polarity::attack, 0.25});
  CHECK(influence("x", g, {{"x", 0.1}, {"y", 0.5}, {"z", 0.4}}) == Approx(0.15));
  // symmetric supporter/attacker
  CHECK(influence("x", g, {{"x", 0.1}, {"y", 0.3}, {"z", 0.6}}) == Approx(0.0).margin(1e-15));
}

TEST_CASE("aggregate_option: singleton, symmetric and two-supporter examples", "[semantics]") {
  auto make = [](std::vector<double> sup, std::vector<double> ch) {
    ArgumentGraph g;
    g.add_option({"o1", "option", "", Category::coordination});
    int i = 0;
    for (double v : sup) g.add_argument({"s" + std::to_string(i++), "s", Stance::support, Role::pharmacist, "o1", {}, v});
    for (double v : ch) g.add_argument({"c" + std::to_string(i++), "c", Stance::challenge, Role::pharmacist, "o1", {}, v});
    return score_all_options(g, {}, {}).option_scores.at("o1");
  };
  CHECK(make({0.8}, {}) == Approx(0.9));
  CHECK(make({0.8}, {0.8}) == 0.5);
  // smax_0.25({0.6, 0.2}) = (0.6 e^2.4 + 0.2 e^0.8) / (e^2.4 + e^0.8)
  const double smax = (0.6 * std::exp(2.4) + 0.2 * std::exp(0.8)) / (std::exp(2.4) + std::exp(0.8));
  CHECK(make({0.6, 0.2}, {}) == Approx(0.5 + 0.5 * smax));
  CHECK(make({0.6, 0.2}, {}) == Approx(0.766).margin(5e-4));
  ArgumentGraph empty;
  empty.add_option({"a", "a", "", Category::safety});
  empty.add_option({"b", "b", "", Category::safety});
  const auto d = score_all_options(empty, {}, {});
  CHECK(d.option_scores == std::map<std::string, double>{{"a", 0.5}, {"b", 0.5}});
}

TEST_CASE("order independence: insertion order does not change the result", "[semantics][property]") {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    GraphShape shape;
    shape.acyclic = coin(rng);
    shape.max_incoming = 0.9;
    const auto g = random_graph(rng, shape);
    std::vector<Argument> args;
    for (const auto& [id, a] : g.arguments()) args.push_back(a);
    std::vector<Relation> rels;
    for (const auto& [k, r] : g.relations()) rels.push_back(r);
    std::shuffle(args.begin(), args.end(), rng);
    std::shuffle(rels.begin(), rels.end(), rng);
    ArgumentGraph h;
    std::vector<CareOption> opts;
    for (const auto& [id, o] : g.options()) opts.push_back(o);
    std::shuffle(opts.begin(), opts.end(), rng);
    for (auto& o : opts) h.add_option(o);
    for (auto& a : args) h.add_argument(a);
    for (auto& r : rels) h.add_relation(r);
    REQUIRE(score_all_options(h, {}, {}) == score_all_options(g, {}, {}));
  }
}

TEST_CASE("score_all_options: composition of solve and aggregate_option", "[semantics]") {
  Rng rng(30);
  const auto g = random_graph(rng, {});
  const auto all = score_all_options(g, {}, {});
  const auto d = solve(g, {});
  CHECK(all.degrees == d.degrees);
  for (const auto& [o, f] : all.option_scores) CHECK(f == aggregate_option(o, g, d.degrees, {}));
}
