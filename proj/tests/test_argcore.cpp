#include "support.hpp"

#include "canoe/text.hpp"

#include <catch_amalgamated.hpp>

using namespace canoe;
using namespace canoe::test;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected canoe::Error");
  return Errc::io;
}

ArgumentGraph one_option() {
  ArgumentGraph g;
  g.add_option({"o1", "option one", "", Category::safety});
  return g;
}

Argument arg(const std::string& id, Stance s = Stance::support, Role r = Role::registered_nurse) {
  return {id, "content of " + id, s, r, "o1", {}, 0.5};
}

}  // namespace

TEST_CASE("add_argument: insert, duplicate and unknown option", "[argcore]") {
  auto g = one_option();
  g.add_argument(arg("a1"));
  CHECK(g.size() == 1);
  CHECK(g.relations().empty());
  CHECK(code_of([&] { g.add_argument(arg("a1")); }) == Errc::duplicate_id);

  Argument stray = arg("a2");
  stray.target_option = "o9";
  CHECK(code_of([&] { g.add_argument(stray); }) == Errc::unknown_option);

  Argument blank = arg("a3");
  blank.content = "";
  CHECK(code_of([&] { g.add_argument(blank); }) == Errc::validation);
  Argument strong = arg("a4");
  strong.tau = 1.01;
  CHECK(code_of([&] { g.add_argument(strong); }) == Errc::validation);
  CHECK(g.size() == 1);
}

TEST_CASE("remove_argument: cascades to incident relations", "[argcore]") {
  auto g = one_option();
  g.add_argument(arg("a1"));
  g.add_argument(arg("a2"));
  g.add_relation({"a1", "a2", Polarity::support, 0.5});
  const auto removed = g.remove_argument("a1");
  REQUIRE(removed.size() == 1);
  CHECK(removed[0].source == "a1");
  CHECK(g.size() == 1);
  CHECK(g.has_argument("a2"));
  CHECK(g.relations().empty());

  g.remove_argument("a2");
  CHECK(g.empty());
  CHECK(code_of([&] { g.remove_argument("missing"); }) == Errc::unknown_argument);
}

TEST_CASE("add_relation: endpoint, self loop, duplicate and weight checks", "[argcore]") {
  auto g = one_option();
  g.add_argument(arg("a1"));
  g.add_argument(arg("a2"));
  g.add_relation({"a1", "a2", Polarity::support, 0.5});
  CHECK(g.relations().size() == 1);
  CHECK(code_of([&] { g.add_relation({"a1", "a1", Polarity::support, 0.5}); }) == Errc::self_loop);
  CHECK(code_of([&] { g.add_relation({"a1", "a2", Polarity::attack, -0.1}); }) == Errc::negative_weight);
  CHECK(code_of([&] { g.add_relation({"a1", "a2", Polarity::support, 0.3}); }) == Errc::duplicate_relation);
  CHECK(code_of([&] { g.add_relation({"a1", "zz", Polarity::support, 0.3}); }) == Errc::unknown_argument);
  // Same pair, other polarity, is a distinct relation.
  g.add_relation({"a1", "a2", Polarity::attack, 0.2});
  CHECK(g.relations().size() == 2);
  CHECK(g.incoming("a2").size() == 2);
}

TEST_CASE("incoming: lexicographic source order", "[argcore]") {
  auto g = one_option();
  for (const char* id : {"c", "a", "b", "t"}) g.add_argument(arg(id));
  g.add_relation({"c", "t", Polarity::support, 0.1});
  g.add_relation({"a", "t", Polarity::attack, 0.1});
  g.add_relation({"b", "t", Polarity::support, 0.1});
  std::vector<std::string> sources;
  for (const auto& r : g.incoming("t")) sources.push_back(r.source);
  CHECK(sources == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("participation_summary: direct counts", "[argcore]") {
  auto empty = one_option();
  const auto zero = participation_summary(empty);
  CHECK(zero.size() == kProviderRoles.size());
  for (const auto& [role, counts] : zero) CHECK(counts == RoleCounts{0, 0});

  auto g = one_option();
  g.add_argument(arg("n1", Stance::support, Role::registered_nurse));
  g.add_argument(arg("n2", Stance::support, Role::registered_nurse));
  g.add_argument(arg("p1", Stance::challenge, Role::pharmacist));
  const auto s = participation_summary(g);
  CHECK(s.at(Role::registered_nurse) == RoleCounts{2, 0});
  CHECK(s.at(Role::pharmacist) == RoleCounts{0, 1});
  CHECK(s.at(Role::general_practitioner) == RoleCounts{0, 0});
}

TEST_CASE("participation_summary: sample graph matches a scan of the graph file", "[argcore][sample]") {
  TempDir tmp;
  make_sample_session(tmp / "s");
  const auto file = read_json_file(tmp / "s" / "graph.json");
  std::map<std::string, std::pair<int, int>> scan;
  for (const auto& a : file.at("arguments")) {
    auto& c = scan[a.at("role").get<std::string>()];
    (a.at("stance") == "support" ? c.first : c.second) += 1;
  }
  const auto summary = participation_summary(graph_from_json(file));
  int total = 0;
  for (const auto& [role, counts] : summary) {
    const auto it = scan.find(std::string(to_string(role)));
    const auto expected = it == scan.end() ? std::pair<int, int>{0, 0} : it->second;
    CHECK(counts.support_count == expected.first);
    CHECK(counts.challenge_count == expected.second);
    total += counts.support_count + counts.challenge_count;
  }
  CHECK(total == static_cast<int>(file.at("arguments").size()));
}

TEST_CASE("graph fuzz: random add/remove keeps referential integrity", "[argcore][property]") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = one_option();
    int next = 0;
    for (int op = 0; op < 60; ++op) {
      const int roll = pick(rng, 0, 9);
      if (roll < 4 || g.size() < 2) {
        g.add_argument(arg(node_id(next++), coin(rng) ? Stance::support : Stance::challenge));
      } else if (roll < 7) {
        const auto s = any_live(rng, g);
        const auto t = any_live(rng, g);
        try {
          g.add_relation({s, t, coin(rng) ? Polarity::support : Polarity::attack, uniform(rng, 0, 1)});
        } catch (const Error& e) {
          CHECK((e.code() == Errc::self_loop || e.code() == Errc::duplicate_relation));
        }
      } else {
        g.remove_argument(any_live(rng, g));
      }
      for (const auto& [key, r] : g.relations()) {
        REQUIRE(g.has_argument(r.source));
        REQUIRE(g.has_argument(r.target));
        REQUIRE(r.source != r.target);
      }
      int total = 0;
      for (const auto& [role, c] : participation_summary(g)) total += c.support_count + c.challenge_count;
      REQUIRE(total == static_cast<int>(g.size()));
    }
  }
}

TEST_CASE("serialization: save, load, save is byte-identical", "[argcore][property]") {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    GraphShape shape;
    shape.min_nodes = 0;
    shape.acyclic = coin(rng);
    const auto g = random_graph(rng, shape);
    const auto text = serialize_graph(g);
    const auto back = graph_from_json(nlohmann::json::parse(text));
    REQUIRE(back == g);
    REQUIRE(serialize_graph(back) == text);
    REQUIRE(graph_hash(back) == graph_hash(g));
  }
}

TEST_CASE("serialization: canonical layout", "[argcore]") {
  auto g = one_option();
  g.add_argument(arg("b"));
  g.add_argument(arg("a"));
  g.add_relation({"b", "a", Polarity::attack, 0.1 + 0.2});
  const auto j = nlohmann::json::parse(serialize_graph(g));
  CHECK(j.at("format_version") == 1);
  CHECK(j.at("arguments")[0].at("arg_id") == "a");
  // 0.1 + 0.2 is stored at 9 significant digits.
  CHECK(j.at("relations")[0].at("weight").get<double>() == 0.3);
  const auto compact = dump_canonical(to_json(g));
  CHECK(compact.find("\"arguments\"") < compact.find("\"format_version\""));
  CHECK(compact.find("\"format_version\"") < compact.find("\"options\""));
  CHECK(compact.find(' ') == compact.find(" of "));  // only whitespace is inside content strings
}

TEST_CASE("graph_from_json: rejects bad documents", "[argcore]") {
  auto g = one_option();
  g.add_argument(arg("a"));
  auto j = to_json(g);
  auto wrong_version = j;
  wrong_version["format_version"] = 2;
  CHECK(code_of([&] { graph_from_json(wrong_version); }) == Errc::validation);
  auto bad_stance = j;
  bad_stance["arguments"][0]["stance"] = "maybe";
  CHECK(code_of([&] { graph_from_json(bad_stance); }) == Errc::validation);
  auto dangling = j;
  dangling["relations"] = {{{"source", "a"}, {"target", "x"}, {"polarity", "support"}, {"weight", 0.5}}};
  CHECK(code_of([&] { graph_from_json(dangling); }) == Errc::unknown_argument);
}

TEST_CASE("canonical_real and dump_canonical", "[argcore]") {
  CHECK(canonical_real(0.1 + 0.2) == 0.3);
  CHECK(canonical_real(1.0 / 3.0) == 0.333333333);
  CHECK(canonical_real(canonical_real(2.0 / 3.0)) == canonical_real(2.0 / 3.0));
  CHECK(std::signbit(canonical_real(-0.0)) == false);
  CHECK(code_of([] { canonical_real(NAN); }) == Errc::validation);

  const nlohmann::json j = {{"z", 1}, {"a", {{"y", 0.5}, {"b", true}}}, {"m", {3, 2, 1}}};
  CHECK(dump_canonical(j) == R"({"a":{"b":true,"y":0.5},"m":[3,2,1],"z":1})");
  CHECK(dump_canonical(nlohmann::json(0.1 + 0.2)) == "0.3");
  CHECK(dump_canonical(nlohmann::json(-0.0)) == "0");
}

TEST_CASE("sha256_hex: standard test vectors", "[argcore]") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("enum names round-trip", "[argcore]") {
  for (int i = 0; i <= static_cast<int>(Role::human_care_planner); ++i) {
    const auto r = static_cast<Role>(i);
    CHECK(parse_role(to_string(r)) == r);
  }
  for (auto s : {ArgStatus::pending, ArgStatus::accepted, ArgStatus::rejected, ArgStatus::modified, ArgStatus::added}) {
    CHECK(parse_status(to_string(s)) == s);
  }
  CHECK(code_of([] { parse_role("surgeon"); }) == Errc::validation);
  CHECK(generated_arg_id(Role::pharmacist, "med_review", Stance::challenge, 2) == "pharmacist-med_review-challenge-2");
  CHECK(human_arg_id(3) == "h-3");
}

TEST_CASE("case files: round-trip and validation", "[argcore]") {
  const auto c = sample_case();
  CHECK(case_from_json(to_json(c)) == c);
  auto bad = to_json(c);
  bad["adl_impairments"] = 7;
  CHECK(code_of([&] { case_from_json(bad); }) == Errc::validation);
  auto no_id = to_json(c);
  no_id["case_id"] = "";
  CHECK(code_of([&] { case_from_json(no_id); }) == Errc::validation);
}

TEST_CASE("tokenize: lowercase alphanumeric runs", "[argcore]") {
  CHECK(text::tokenize("Grab-bars, IN the bath2room!") ==
        std::vector<std::string>{"grab", "bars", "in", "the", "bath2room"});
  CHECK(text::tokenize("  ...  ").empty());
  CHECK(text::overlap_ratio({"a", "b"}, {"b", "c"}) == 0.5);
  CHECK(text::overlap_ratio({}, {"b"}) == 0.0);
}
