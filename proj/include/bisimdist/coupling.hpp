#pragma once

#include <compare>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bisimdist/automaton.hpp"
#include "bisimdist/lifting.hpp"
#include "bisimdist/transport.hpp"

namespace bisimdist {

/// Identity of a distribution pair: (state s, index into delta(s)) against (t, index into delta(t)).
struct DistPairKey {
  int s, i, t, j;
  friend auto operator<=>(const DistPairKey&, const DistPairKey&) = default;
};

/// C = (f, rho). rho is dense over pairs; f only holds the pairs rho demands.
struct CouplingStructure {
  int n = 0;
  std::vector<SetCoupling> rho;        // row-major over (s, t)
  std::vector<char> clamped;           // pairs fixed to 0 up front; they carry no rho
  std::map<DistPairKey, Coupling> f;

  explicit CouplingStructure(int states = 0)
      : n(states), rho(static_cast<std::size_t>(states) * states), clamped(rho.size(), 0) {}

  SetCoupling& at(int s, int t) { return rho[s * n + t]; }
  const SetCoupling& at(int s, int t) const { return rho[s * n + t]; }
  const Coupling& coupling(int s, int i, int t, int j) const;

  /// Canonical text of rho and every f support, used to detect repeats.
  std::string fingerprint() const;
};

/// Invariant violations of c with respect to a (empty when valid).
std::vector<std::string> check_structure(const CouplingStructure& c, const Automaton& a);

/// A_C restricted to the pairs reachable from the sources. States are pair
/// indices s * n + t; bad pairs are absorbing.
struct InducedMdp {
  int n = 0;
  std::vector<char> bad;
  std::vector<char> reachable;
  std::vector<std::vector<std::vector<std::pair<int, double>>>> actions;
};

/// Builds A_C from `sources` (all pairs when empty).
InducedMdp induce(const CouplingStructure& c, const Automaton& a,
                  std::span<const std::pair<int, int>> sources = {});

enum class DiscrepancyMethod { PolicyIteration, ValueIteration };

struct DiscrepancyOptions {
  DiscrepancyMethod method = DiscrepancyMethod::PolicyIteration;
  double tolerance = 1e-7;  // value-iteration stopping threshold
  long max_sweeps = 1000000;
};

/// gamma_lambda^C, the least fixed point of Gamma_lambda^C.
DistMatrix discrepancy(const CouplingStructure& c, const Automaton& a, double lambda,
                       const DiscrepancyOptions& opts = {});

/// One application of Gamma_lambda^C to d.
DistMatrix gamma_apply(const CouplingStructure& c, const Automaton& a, double lambda,
                       const DistMatrix& d);

}  // namespace bisimdist
