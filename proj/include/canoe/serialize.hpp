#pragma once

#include "canoe/graph.hpp"
#include "canoe/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace canoe {

inline constexpr int kFormatVersion = 1;

using nlohmann::json;

// JSON mapping of the domain types. Readers throw Errc::validation on missing
// fields, wrong types or unknown enum names.
json to_json(const PatientCase& c);
PatientCase case_from_json(const json& j);

json to_json(const EvidenceDoc& d);
EvidenceDoc evidence_from_json(const json& j);

json to_json(const CareOption& o);
CareOption option_from_json(const json& j);

json to_json(const Argument& a);
Argument argument_from_json(const json& j);

json to_json(const Relation& r);
Relation relation_from_json(const json& j);

// Graph file: {"arguments": [...], "format_version": 1, "options": [...],
// "relations": [...]}, each array in id order.
json to_json(const ArgumentGraph& g);
ArgumentGraph graph_from_json(const json& j);

// Degrees file: {"degrees": {...}, "format_version": 1, "iterations_used": n,
// "option_scores": {...}, "residual": r}.
json to_json(const DegreeAssignment& d);
DegreeAssignment degrees_from_json(const json& j);

std::string serialize_graph(const ArgumentGraph& g);  // canonical, indented
std::string graph_hash(const ArgumentGraph& g);       // sha256 of compact canonical form

// File helpers. read_json throws Errc::not_found / Errc::validation.
json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file and rename, so readers never see a torn file.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& text);

// Field accessors that raise Errc::validation with the field name.
namespace field {
const json& required(const json& j, const char* key);
std::string string(const json& j, const char* key);
double real(const json& j, const char* key);
int integer(const json& j, const char* key);
bool boolean(const json& j, const char* key);
std::vector<std::string> strings(const json& j, const char* key);
void check_version(const json& j);
}  // namespace field

}  // namespace canoe
