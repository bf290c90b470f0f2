#include "bisimdist/value_iter.hpp"

#include <chrono>

#include "bisimdist/error.hpp"
#include "bisimdist/lifting.hpp"

namespace bisimdist {

namespace {
constexpr long kResidualModeCap = 1000000;
}

ViResult vi_run(const Automaton& a, double lambda, const ViBudget& budget,
                const std::function<void(long, const DistMatrix&)>& observer) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in (0,1]");
  const int modes = budget.max_iters.has_value() + budget.max_seconds.has_value() +
                    budget.target_residual.has_value();
  if (modes != 1) throw InputError("value iteration needs exactly one budget");
  if (budget.max_iters && *budget.max_iters < 0) throw InputError("negative iteration budget");

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  ViResult r;
  const int n = a.size();
  r.d = DistMatrix::Zero(n, n);
  if (observer) observer(0, r.d);
  for (;;) {
    if (budget.max_iters && r.iters >= *budget.max_iters) break;
    if (budget.max_seconds && r.iters > 0 && elapsed() > *budget.max_seconds) break;
    if (budget.target_residual && r.iters > 0 && r.residual <= *budget.target_residual) break;
    if (budget.target_residual && r.iters >= kResidualModeCap)
      throw ConvergenceError("value iteration did not reach the target residual", r.residual);
    DistMatrix next = delta_apply(lambda, r.d, a, &r.tp_count);
    r.residual = (next - r.d).cwiseAbs().maxCoeff();
    r.d = std::move(next);
    ++r.iters;
    if (observer) observer(r.iters, r.d);
  }
  r.wall_time = elapsed();
  return r;
}

}  // namespace bisimdist
