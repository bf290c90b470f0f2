#pragma once

#include <functional>
#include <optional>

#include "bisimdist/automaton.hpp"

namespace bisimdist {

/// Exactly one field must be set.
struct ViBudget {
  std::optional<long> max_iters;
  std::optional<double> max_seconds;     // stop once elapsed time exceeds this (at least one step)
  std::optional<double> target_residual; // stop once the sup-norm step change is at most this
};

struct ViResult {
  DistMatrix d;
  long iters = 0;
  long tp_count = 0;
  double wall_time = 0.0;
  double residual = 0.0;  // sup-norm change of the last step
};

/// Iterates Delta_lambda from the zero matrix. `observer`, if set, sees every iterate.
ViResult vi_run(const Automaton& a, double lambda, const ViBudget& budget,
                const std::function<void(long, const DistMatrix&)>& observer = {});

}  // namespace bisimdist
