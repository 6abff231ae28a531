#include "dce/vts.hpp"

#include "dce/errors.hpp"

namespace dce {

VtsVerdict vts_check(const Idea& idea, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ConfigError("vts: tau must be in (0, 1]");
  }
  VtsVerdict v;
  v.probability = idea.probability;
  v.tau = tau;
  v.accepted = idea.probability < tau;
  return v;
}

VtsPartition vts_filter(const std::vector<Idea>& candidates, double tau) {
  VtsPartition out;
  for (const Idea& idea : candidates) {
    VtsVerdict v = vts_check(idea, tau);
    if (v.accepted) {
      out.accepted.push_back(idea);
    } else {
      out.rejected.emplace_back(idea, v);
    }
  }
  return out;
}

}  // namespace dce
