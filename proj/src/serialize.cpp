#include "canoe/serialize.hpp"

#include "canoe/canonical.hpp"
#include "canoe/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

namespace canoe {

namespace field {

const json& required(const json& j, const char* key) {
  if (!j.is_object()) throw Error(Errc::validation, std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw Error(Errc::validation, std::string("missing field '") + key + "'");
  return *it;
}

std::string string(const json& j, const char* key) {
  const auto& v = required(j, key);
  if (!v.is_string()) throw Error(Errc::validation, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double real(const json& j, const char* key) {
  const auto& v = required(j, key);
  if (!v.is_number()) throw Error(Errc::validation, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

int integer(const json& j, const char* key) {
  const auto& v = required(j, key);
  if (!v.is_number_integer()) throw Error(Errc::validation, std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

bool boolean(const json& j, const char* key) {
  const auto& v = required(j, key);
  if (!v.is_boolean()) throw Error(Errc::validation, std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::vector<std::string> strings(const json& j, const char* key) {
  const auto& v = required(j, key);
  if (!v.is_array()) throw Error(Errc::validation, std::string("field '") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw Error(Errc::validation, std::string("field '") + key + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

void check_version(const json& j) {
  const int v = integer(j, "format_version");
  if (v != kFormatVersion) {
    throw Error(Errc::validation, "unsupported format_version " + std::to_string(v));
  }
}

}  // namespace field

json to_json(const PatientCase& c) {
  json flags = json::array();
  for (Flag f : c.flags) flags.push_back(std::string(to_string(f)));
  return {{"format_version", kFormatVersion},
          {"case_id", c.case_id},
          {"age", c.age},
          {"conditions", c.conditions},
          {"medications", c.medications},
          {"adl_impairments", c.adl_impairments},
          {"iadl_impairments", c.iadl_impairments},
          {"falls_90d", c.falls_90d},
          {"hospitalizations_90d", c.hospitalizations_90d},
          {"flags", flags},
          {"narrative", c.narrative},
          {"assessment_source", c.assessment_source}};
}

PatientCase case_from_json(const json& j) {
  field::check_version(j);
  PatientCase c;
  c.case_id = field::string(j, "case_id");
  c.age = field::integer(j, "age");
  c.conditions = field::strings(j, "conditions");
  c.medications = field::strings(j, "medications");
  c.adl_impairments = field::integer(j, "adl_impairments");
  c.iadl_impairments = field::integer(j, "iadl_impairments");
  c.falls_90d = field::integer(j, "falls_90d");
  c.hospitalizations_90d = field::integer(j, "hospitalizations_90d");
  for (const auto& f : field::strings(j, "flags")) c.flags.insert(parse_flag(f));
  c.narrative = field::string(j, "narrative");
  c.assessment_source = field::string(j, "assessment_source");
  validate(c);
  return c;
}

json to_json(const EvidenceDoc& d) {
  return {{"doc_id", d.doc_id},
          {"text", d.text},
          {"source_type", std::string(to_string(d.source_type))},
          {"reliability", d.reliability},
          {"similarity", d.similarity}};
}

EvidenceDoc evidence_from_json(const json& j) {
  EvidenceDoc d;
  d.doc_id = field::string(j, "doc_id");
  d.text = field::string(j, "text");
  d.source_type = parse_source_type(field::string(j, "source_type"));
  d.reliability = field::real(j, "reliability");
  d.similarity = j.contains("similarity") ? field::real(j, "similarity") : 0.0;
  if (!(d.reliability >= 0.0 && d.reliability <= 1.0) || !(d.similarity >= 0.0 && d.similarity <= 1.0)) {
    throw Error(Errc::validation, "evidence '" + d.doc_id + "': reliability and similarity must lie in [0,1]");
  }
  return d;
}

json to_json(const CareOption& o) {
  return {{"option_id", o.option_id},
          {"title", o.title},
          {"description", o.description},
          {"category", std::string(to_string(o.category))}};
}

CareOption option_from_json(const json& j) {
  CareOption o;
  o.option_id = field::string(j, "option_id");
  o.title = field::string(j, "title");
  o.description = field::string(j, "description");
  o.category = parse_category(field::string(j, "category"));
  return o;
}

json to_json(const Argument& a) {
  return {{"arg_id", a.arg_id},
          {"content", a.content},
          {"stance", std::string(to_string(a.stance))},
          {"role", std::string(to_string(a.role))},
          {"target_option", a.target_option},
          {"cited_evidence", a.cited_evidence},
          {"tau", a.tau},
          {"tau_pinned", a.tau_pinned},
          {"status", std::string(to_string(a.status))}};
}

Argument argument_from_json(const json& j) {
  Argument a;
  a.arg_id = field::string(j, "arg_id");
  a.content = field::string(j, "content");
  a.stance = parse_stance(field::string(j, "stance"));
  a.role = parse_role(field::string(j, "role"));
  a.target_option = field::string(j, "target_option");
  a.cited_evidence = field::strings(j, "cited_evidence");
  a.tau = field::real(j, "tau");
  a.tau_pinned = field::boolean(j, "tau_pinned");
  a.status = parse_status(field::string(j, "status"));
  return a;
}

json to_json(const Relation& r) {
  return {{"source", r.source},
          {"target", r.target},
          {"polarity", std::string(to_string(r.polarity))},
          {"weight", r.weight}};
}

Relation relation_from_json(const json& j) {
  Relation r;
  r.source = field::string(j, "source");
  r.target = field::string(j, "target");
  r.polarity = parse_polarity(field::string(j, "polarity"));
  r.weight = j.contains("weight") ? field::real(j, "weight") : kDefaultEdgeWeight;
  return r;
}

json to_json(const ArgumentGraph& g) {
  json args = json::array();
  for (const auto& [id, a] : g.arguments()) args.push_back(to_json(a));
  json opts = json::array();
  for (const auto& [id, o] : g.options()) opts.push_back(to_json(o));
  json rels = json::array();
  for (const auto& [key, r] : g.relations()) rels.push_back(to_json(r));
  return {{"format_version", kFormatVersion}, {"arguments", args}, {"options", opts}, {"relations", rels}};
}

ArgumentGraph graph_from_json(const json& j) {
  field::check_version(j);
  ArgumentGraph g;
  for (const auto& o : field::required(j, "options")) g.add_option(option_from_json(o));
  for (const auto& a : field::required(j, "arguments")) g.add_argument(argument_from_json(a));
  for (const auto& r : field::required(j, "relations")) g.add_relation(relation_from_json(r));
  return g;
}

json to_json(const DegreeAssignment& d) {
  json degrees = json::object();
  for (const auto& [id, v] : d.degrees) degrees[id] = v;
  json scores = json::object();
  for (const auto& [id, v] : d.option_scores) scores[id] = v;
  return {{"format_version", kFormatVersion},
          {"degrees", degrees},
          {"option_scores", scores},
          {"iterations_used", d.iterations_used},
          {"residual", d.residual}};
}

DegreeAssignment degrees_from_json(const json& j) {
  field::check_version(j);
  DegreeAssignment d;
  for (const auto& [id, v] : field::required(j, "degrees").items()) d.degrees[id] = v.get<double>();
  for (const auto& [id, v] : field::required(j, "option_scores").items()) d.option_scores[id] = v.get<double>();
  d.iterations_used = field::integer(j, "iterations_used");
  d.residual = field::real(j, "residual");
  return d;
}

std::string serialize_graph(const ArgumentGraph& g) { return dump_canonical(to_json(g), 2) + "\n"; }

std::string graph_hash(const ArgumentGraph& g) { return sha256_hex(dump_canonical(to_json(g))); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::validation, path.string() + ": " + e.what());
  }
}

void write_text_file_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + tmp);
    out << text;
    out.flush();
    if (!out) throw Error(Errc::io, "short write to " + tmp);
  }
  const int fd = ::open(tmp.c_str(), O_RDONLY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io, "cannot rename " + tmp + ": " + ec.message());
}

}  // namespace canoe
