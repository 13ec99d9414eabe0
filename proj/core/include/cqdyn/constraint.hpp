#pragma once

#include <vector>

#include "cqdyn/clock.hpp"
#include "cqdyn/numeric.hpp"

namespace cqdyn {

enum class InteractionKind { none, separable, generic };

// one term f_i(T) (x) S_i of a separable interaction
struct SeparableTerm {
  std::vector<double> samples;  // f_i(t_k) on the clock grid
  Matrix coupling;              // S_i, Hermitian on the system
};

struct InteractionSpec {
  InteractionKind kind = InteractionKind::none;
  double lambda = 0.0;
  std::vector<SeparableTerm> terms;  // separable only
  Matrix hbar;                       // generic only: (d*n)x(d*n), lambda-exclusive

  static InteractionSpec make_none(double lambda = 0.0);
  static InteractionSpec make_separable(double lambda, std::vector<SeparableTerm> terms);
  static InteractionSpec make_generic(double lambda, Matrix hbar);
};

// lambda-exclusive H_bar_int as a (d*n)x(d*n) matrix on the kinematical space;
// separable terms materialize as sum_i diag(f_i(t_k)) (x) S_i
Matrix materialize_interaction(const InteractionSpec& inter, const Clock& clock,
                               int system_dim);

struct TotalHamiltonian {
  Matrix h;            // H_C (x) I + I (x) (H_S + shift) + lambda * H_bar_int
  Matrix system;       // H_S with any gauge shift absorbed
  Matrix interaction;  // lambda-exclusive H_bar_int, materialized
  double lambda = 0.0;
  double shift = 0.0;
  int clock_dim = 0;
  int system_dim = 0;
};

TotalHamiltonian assemble_total(const Clock& clock, const Matrix& h_s,
                                const InteractionSpec& inter);

// add a constant to the system Hamiltonian (an unobservable global phase)
TotalHamiltonian apply_shift(const TotalHamiltonian& total, double shift);

// default null-space tolerance, 1e-10 * ||H||_F
double default_constraint_tol(const TotalHamiltonian& total);

struct PhysicalState {
  Vector psi;                          // kinematical vector, dim d*n
  double residual = 0.0;               // ||H psi||
  double conditional_norm_drift = 0.0; // max_k | ||psi_S(t_k)||^2 - ||psi_S(t_0)||^2 |
};

struct PhysicalSector {
  std::vector<PhysicalState> states;  // descending conditional norm at k = 0
  TotalHamiltonian total;             // shift applied when auto_shift fired
  double nearest_eigenvalue = 0.0;    // smallest-|.| eigenvalue of the input H
};

// Null vectors of H within tol (0 -> default). With auto_shift, when no
// eigenvalue lies within tol the nearest one E* is moved to zero by absorbing
// -E* into H_S, and that eigenspace is returned. Without auto_shift an empty
// result throws NoPhysicalStateError carrying the nearest eigenvalue.
PhysicalSector physical_states(const TotalHamiltonian& total, double tol = 0.0,
                               bool auto_shift = false);

// conditional state (<t_k| (x) I_S) |psi>> -- the k-th system block
Vector condition(const PhysicalState& phys, const Clock& clock, int k);
Vector condition_block(const Vector& kinematical, int clock_dim, int system_dim, int k);

struct Trajectory {
  ClockSpec clock;
  std::vector<Vector> states;  // psi_S(t_k), k = 0..d-1
  std::vector<double> norms;

  int size() const { return static_cast<int>(states.size()); }
  int system_dim() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
};

Trajectory make_trajectory(const ClockSpec& spec, std::vector<Vector> states);

Trajectory full_trajectory(const PhysicalState& phys, const Clock& clock);

// sum_k |t_k> (x) states[k]; exact inverse of full_trajectory
Vector reconstruct(const Trajectory& traj, const Clock& clock);

// <psi_S(t_k)|phi_S(t_k)>, the physical inner product evaluated at slot k
Complex physical_inner_product(const PhysicalState& a, const PhysicalState& b,
                               const Clock& clock, int k);

// max over slot pairs of |value(k) - value(k')|; zero iff the physical inner
// product is independent of the conditioning time
double inner_product_drift(const PhysicalState& a, const PhysicalState& b,
                           const Clock& clock);

// rescale so ||psi_S(t_k0)|| = 1 and refresh the drift diagnostic
PhysicalState normalize_physical(const PhysicalState& phys, const Clock& clock, int k0);

}  // namespace cqdyn
