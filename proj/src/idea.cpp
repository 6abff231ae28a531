#include "dce/idea.hpp"

namespace dce {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool idea_fields_valid(const Idea& idea, std::string* reason) {
  if (trim(idea.name).empty()) {
    if (reason) *reason = "empty name";
    return false;
  }
  if (trim(idea.description).empty()) {
    if (reason) *reason = "empty description";
    return false;
  }
  if (!(idea.probability >= 0.0 && idea.probability <= 1.0)) {
    if (reason) *reason = "probability out of range [0,1]";
    return false;
  }
  return true;
}

std::string embedding_input(const Idea& idea) {
  return idea.name + ": " + idea.description;
}

}  // namespace dce
