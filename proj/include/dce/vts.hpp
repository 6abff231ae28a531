#pragma once

#include <utility>
#include <vector>

#include "dce/idea.hpp"

namespace dce {

/// Outcome of the verbalized-tail-sampling check for one idea.
/// accepted <=> probability < tau (the boundary P == tau rejects).
struct VtsVerdict {
  bool accepted = false;
  double probability = 0.0;
  double tau = 0.0;
};

struct VtsPartition {
  std::vector<Idea> accepted;
  std::vector<std::pair<Idea, VtsVerdict>> rejected;
};

/// Partitions candidates by self-assessed probability against tau,
/// preserving input order within each side.
VtsPartition vts_filter(const std::vector<Idea>& candidates, double tau);

VtsVerdict vts_check(const Idea& idea, double tau);

}  // namespace dce
