#pragma once

#include <vector>

#include "cqdyn/numeric.hpp"

namespace cqdyn {

struct ClockSpec {
  int dim = 2;      // number of grid points d
  double t0 = 0.0;  // time of the first clock state
  double dt = 1.0;  // grid spacing, > 0

  double period() const { return dim * dt; }
  void validate() const;  // throws on dim < 2 or dt <= 0
};

// Finite cyclic clock: the time operator T is diagonal in the clock basis
// (the standard basis) with entries t_k, and the clock Hamiltonian is its
// discrete Fourier conjugate, H_C = F diag(omega) F^dag with frequencies
// omega_m = 2*pi*m/(d*dt) for m in {-floor(d/2), ..., ceil(d/2)-1}.
// With this pairing exp(-i*H_C*dt) maps |t_k> to |t_{k+1 mod d}> exactly.
struct Clock {
  ClockSpec spec;
  std::vector<double> times;  // t_k = t0 + k*dt
  RealVector frequencies;     // omega_m, ascending
  Matrix time_operator;       // T
  Matrix hamiltonian;         // H_C
  Matrix fourier;             // columns are the H_C eigenstates in the clock basis

  int dim() const { return spec.dim; }
};

Clock build_clock(const ClockSpec& spec);

// k-th clock state |t_k> (standard basis vector)
Vector clock_state(const Clock& clock, int k);

// Approximate-commutation diagnostic. [T, H_C] = i*I cannot hold entrywise in
// finite dimension (the commutator is traceless), so the defect is measured as
// max_c ||([T,H_C] - i*I) g_c|| over balanced discrete-Gaussian probe states
// g_c centered in the interior half of the grid, away from the wrap-around.
// Reported, never asserted small at fixed d; decreases as d grows at fixed
// period.
double commutator_defect(const Clock& clock);

// max_k || exp(-i*H_C*dt)|t_k> - |t_{k+1 mod d}> ||
double translation_defect(const Clock& clock);

// || exp(-i*H_C*d*dt) - I ||_F
double periodicity_defect(const Clock& clock);

}  // namespace cqdyn
