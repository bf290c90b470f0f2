#pragma once

#include "bisimdist/automaton.hpp"

namespace bisimdist {

/// Largest self-closed relation for a Delta_1 fixed point d. Equalities
/// against d(s,t) are read within eps. Throws InputError when d is not a
/// fixed point within eps.
Relation largest_selfclosed(const DistMatrix& d, const Automaton& a, double eps,
                            long* tp_count = nullptr);

/// Checks conditions (i)-(iii) for every member of m.
bool is_selfclosed(const Relation& m, const DistMatrix& d, const Automaton& a, double eps);

struct DecreaseCert {
  double theta = 0.0;
  double theta1 = 1.0;
  double theta2 = 1.0;
  double theta3 = 1.0;
  DistMatrix new_d;
};

/// d_M: d lowered by theta on m. Throws InputError when m is empty or not self-closed.
DecreaseCert decrease(const DistMatrix& d, const Relation& m, const Automaton& a, double eps,
                      long* tp_count = nullptr);

}  // namespace bisimdist
