#pragma once

#include <string>

namespace dce {

/// One generated candidate.
struct Idea {
  std::string name;
  std::string description;
  std::string category;      // raw model-assigned label, never transformed
  double probability = 0.0;  // self-assessed P, in [0, 1]
  int batch_index = 0;       // >= 1 once assigned by the pipeline
  int slot_index = 0;        // position within the batch, [0, n)
};

std::string trim(const std::string& s);

/// Checks the field invariants (non-empty trimmed name/description,
/// probability in [0,1]). On failure writes a reason if requested.
bool idea_fields_valid(const Idea& idea, std::string* reason = nullptr);

/// Text handed to the embedder: "name: description".
std::string embedding_input(const Idea& idea);

}  // namespace dce
