#pragma once

#include <stdexcept>
#include <string>

namespace setrend {

/// Raised when a scenario, region, graph, or controller fails its load-time
/// checks. The message names the violated invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pairwise distance reached the safety radius. Fields are filled in as the
/// error propagates outward (the potential knows the distance, the simulator
/// knows the time).
class SafetyViolation : public std::runtime_error {
 public:
  SafetyViolation(std::string msg, double distance, int agent_i = -1,
                  int agent_j = -1, double time = -1.0)
      : std::runtime_error(std::move(msg)),
        distance(distance),
        agent_i(agent_i),
        agent_j(agent_j),
        time(time) {}

  double distance;
  int agent_i;
  int agent_j;
  double time;
};

/// A state stopped being finite during integration.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(std::string msg, double time)
      : std::runtime_error(std::move(msg)), time(time) {}

  double time;
};

}  // namespace setrend
