#pragma once

#include <optional>
#include <random>
#include <vector>

#include "bisimdist/automaton.hpp"
#include "bisimdist/coupling.hpp"
#include "bisimdist/lifting.hpp"

namespace bisimdist {

struct SpiOptions {
  double eps = 1e-6;
  bool precompute_bisim = true;
  DiscrepancyOptions discrepancy{};
  long max_updates = 1000000;
  long max_outer_loops = 100000;
};

struct SpiTrace {
  long iterations = 0;   // coupling structures whose discrepancy was computed
  long tp_count = 0;     // transportation problems solved
  long outer_loops = 0;  // outer iterations of the undiscounted algorithm
  double wall_time = 0.0;
  DistMatrix final;
};

struct Violator {
  int s = -1;
  int t = -1;
  double delta = 0.0;  // Delta_lambda(d)(s, t)
  HausdorffEval h;
};

/// First (s, t) in row-major order with Delta_lambda(d)(s,t) < d(s,t) - eps.
/// Pairs marked in `skip` (row-major, may be null) are not examined.
std::optional<Violator> find_violator(const DistMatrix& d, const Automaton& a, double lambda,
                                      double eps, const std::vector<char>* skip = nullptr,
                                      long* tp_count = nullptr);

/// Pairs to clamp at distance 0: distinct bisimilar states.
std::vector<char> bisimilar_pairs(const Automaton& a);

/// rho = h(label mismatch) and North-West-corner couplings.
CouplingStructure initial_coupling_structure(const Automaton& a, const std::vector<char>& clamped,
                                             long* tp_count = nullptr);

/// (k(d), h(d)) on every pair that moves.
CouplingStructure structure_from(const DistMatrix& d, const Automaton& a,
                                 const std::vector<char>& clamped, long* tp_count = nullptr);

/// Random set-couplings and random vertex couplings; no clamping.
CouplingStructure random_coupling_structure(const Automaton& a, std::mt19937_64& rng);

/// The inner loop: improve c until gamma has no violator. Returns gamma and
/// leaves the final structure in c. Counters accumulate into `trace`.
DistMatrix improve_to_fixpoint(const Automaton& a, CouplingStructure& c, double lambda,
                               const SpiOptions& opts, SpiTrace& trace);

/// Simple policy iteration for lambda in (0,1).
SpiTrace spi_discounted(const Automaton& a, double lambda, const SpiOptions& opts = {});

/// Simple policy iteration with the self-closed termination check, lambda = 1.
SpiTrace spi_undiscounted(const Automaton& a, const SpiOptions& opts = {});

/// Dispatches on lambda.
SpiTrace spi(const Automaton& a, double lambda, const SpiOptions& opts = {});

}  // namespace bisimdist
