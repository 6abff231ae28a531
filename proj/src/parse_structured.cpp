#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <string>

#include "dce/errors.hpp"
#include "dce/generator.hpp"

namespace dce {

namespace {

using nlohmann::json;

std::string snippet_of(const json& j) {
  std::string s = j.dump();
  if (s.size() > 200) s = s.substr(0, 200) + "...";
  return s;
}

// Returns the probability if the field holds a number or a numeric string.
bool read_probability(const json& item, double* out) {
  if (!item.contains("probability")) return false;
  const json& p = item["probability"];
  if (p.is_number()) {
    *out = p.get<double>();
    return true;
  }
  if (p.is_string()) {
    const std::string s = p.get<std::string>();
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() && end != nullptr) {
      while (*end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
      if (*end == '\0') {
        *out = v;
        return true;
      }
    }
  }
  return false;
}

bool read_string_field(const json& item, const char* key, std::string* out) {
  if (!item.contains(key) || !item[key].is_string()) return false;
  *out = item[key].get<std::string>();
  return true;
}

// Locate the ideas array inside a parsed JSON value: either {"ideas": [...]}
// or a bare top-level array.
const json* find_ideas_array(const json& root) {
  if (root.is_object() && root.contains("ideas") && root["ideas"].is_array()) {
    return &root["ideas"];
  }
  if (root.is_array()) return &root;
  return nullptr;
}

// Scans for a balanced JSON value starting at `start` ('{' or '['),
// respecting string literals and escapes. Returns one-past-the-end index or
// npos when unbalanced.
std::size_t balanced_end(const std::string& s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      --depth;
      if (depth == 0) return i + 1;
      if (depth < 0) return std::string::npos;
    }
  }
  return std::string::npos;
}

}  // namespace

nlohmann::json idea_batch_schema() {
  return json{
      {"type", "object"},
      {"properties",
       {{"ideas",
         {{"type", "array"},
          {"items",
           {{"type", "object"},
            {"properties",
             {{"name", {{"type", "string"}}},
              {"description", {{"type", "string"}}},
              {"category", {{"type", "string"}}},
              {"probability", {{"type", "number"}, {"minimum", 0.0}, {"maximum", 1.0}}}}},
            {"required", {"name", "description", "category", "probability"}},
            {"additionalProperties", false}}}}}}},
      {"required", {"ideas"}},
      {"additionalProperties", false}};
}

ParseResult parse_structured(const std::string& raw, int expected_count) {
  const json* ideas = nullptr;
  json root;

  // 1. the whole response is the object
  root = json::parse(raw, nullptr, false);
  if (!root.is_discarded()) ideas = find_ideas_array(root);

  // 2. first balanced JSON value that conforms, wherever it sits
  if (ideas == nullptr) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '{' && raw[i] != '[') continue;
      std::size_t end = balanced_end(raw, i);
      if (end == std::string::npos) continue;
      json candidate = json::parse(raw.substr(i, end - i), nullptr, false);
      if (candidate.is_discarded()) continue;
      root = std::move(candidate);
      ideas = find_ideas_array(root);
      if (ideas != nullptr) break;
      // skip past this value so nested scans don't re-parse its innards
      i = end - 1;
    }
  }

  if (ideas == nullptr) {
    throw BatchFailure("no structured idea batch found in response", raw);
  }

  ParseResult out;
  int index = -1;
  for (const json& item : *ideas) {
    ++index;
    if (!item.is_object()) {
      out.rejections.push_back({index, "item is not an object", snippet_of(item)});
      continue;
    }
    Idea idea;
    if (!read_string_field(item, "name", &idea.name) || trim(idea.name).empty()) {
      out.rejections.push_back({index, "missing or empty name", snippet_of(item)});
      continue;
    }
    if (!read_string_field(item, "description", &idea.description) ||
        trim(idea.description).empty()) {
      out.rejections.push_back({index, "missing or empty description", snippet_of(item)});
      continue;
    }
    if (!read_string_field(item, "category", &idea.category)) {
      out.rejections.push_back({index, "missing category", snippet_of(item)});
      continue;
    }
    double p = 0.0;
    if (!read_probability(item, &p)) {
      out.rejections.push_back({index, "missing or non-numeric probability", snippet_of(item)});
      continue;
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      out.rejections.push_back({index, "probability out of range [0,1]", snippet_of(item)});
      continue;
    }
    if (static_cast<int>(out.ideas.size()) >= expected_count) {
      out.rejections.push_back({index, "excess item beyond requested batch size", snippet_of(item)});
      continue;
    }
    idea.name = trim(idea.name);
    idea.description = trim(idea.description);
    idea.category = trim(idea.category);
    idea.probability = p;
    out.ideas.push_back(std::move(idea));
  }
  return out;
}

const char* schema_mode_name(SchemaMode mode) {
  switch (mode) {
    case SchemaMode::native_structured: return "native-structured";
    case SchemaMode::schema_in_system_prompt: return "schema-in-system-prompt";
  }
  return "native-structured";
}

SchemaMode schema_mode_from_name(const std::string& name) {
  if (name == "native-structured") return SchemaMode::native_structured;
  if (name == "schema-in-system-prompt") return SchemaMode::schema_in_system_prompt;
  throw ConfigError("unknown schema mode: " + name);
}

}  // namespace dce
