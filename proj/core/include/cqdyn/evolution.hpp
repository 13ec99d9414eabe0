#pragma once

#include <vector>

#include "cqdyn/constraint.hpp"

namespace cqdyn {

// Interaction kernel K(t_k, t_j) = <t_k| H_int |t_j>, lambda-inclusive,
// stored as the full (d*n)x(d*n) matrix; block (k,j) is the n x n operator
// coupling slot k to slot j. K(t,t')^dag = K(t',t) holds exactly for
// Hermitian interactions.
struct KernelOperator {
  int clock_dim = 0;
  int system_dim = 0;
  double lambda = 0.0;
  Matrix full;

  Eigen::Block<const Matrix> block(int k, int j) const {
    return full.block(k * system_dim, j * system_dim, system_dim, system_dim);
  }
};

KernelOperator build_kernel(const InteractionSpec& inter, const Clock& clock,
                            int system_dim);

// max over block pairs of the entrywise defect |K(k,j)^dag - K(j,k)|
double block_hermiticity_defect(const KernelOperator& kernel);

// [H_K] psi at slot k: sum_j K(k,j) psi_S(t_j)
Vector memory_term(const KernelOperator& kernel, const Trajectory& traj, int k);

// max_k || i (psi_{k+1} - psi_{k-1})/(2 dt) - H_S psi_k - [H_K]psi_k ||,
// cyclic indices; the executable form of the modified Schrodinger equation
double residual_modified_se(const KernelOperator& kernel, const Matrix& h_s,
                            const Trajectory& traj);

// same, restricted to k = 1..d-2 (for trajectories that are not periodic)
double residual_modified_se_interior(const KernelOperator& kernel, const Matrix& h_s,
                                     const Trajectory& traj);

inline constexpr int kConvergedOrder = -1;

struct Propagator {
  Matrix v;
  int k_from = 0;
  int k_to = 0;
  int order = 0;  // series truncation, or kConvergedOrder
  double isometry_defect = 0.0;
};

// ||V^dag V - I||_F
double isometry_defect(const Matrix& v);

// U(t_k, t_k0) = exp(-i H_S (t_k - t_k0))
Propagator schrodinger_propagator(const Matrix& h_s, int k, int k0, const Clock& clock);

// Series propagator V = sum_{m<=order} V_m with V_0 = U and
//   V_m(t_k) = -i U(t_k) Trapz_{s in [t_k0, t_k]} U(t_s)^dag sum_j K(s,j) V_{m-1}(t_j),
// trapezoidal in s, plain block sum in j. Order counts kernel insertions with
// lambda folded into K. Forward only (k >= k0).
Propagator series_propagator(const Matrix& h_s, const KernelOperator& kernel,
                             int order, int k, int k0, const Clock& clock);

// all forward propagators at once; entry i corresponds to k = k0 + i
std::vector<Propagator> series_propagators(const Matrix& h_s, const KernelOperator& kernel,
                                           int order, int k0, const Clock& clock);

struct PicardResult {
  Trajectory trajectory;
  int iterations = 0;
  std::vector<double> update_norms;  // max_k ||psi^{m+1} - psi^m|| per iteration
};

// Fixed point of psi(t_k) = U(t_k)psi0 - i Trapz_s U(t_k,t_s) sum_j K(s,j) psi(t_j),
// iterated from the free trajectory until the update drops below tol.
// Throws PicardDivergenceError with the last contraction ratio on failure.
PicardResult picard_solve_detailed(const Matrix& h_s, const KernelOperator& kernel,
                                   const Vector& psi0, int k0, const Clock& clock,
                                   int max_iter, double tol);
Trajectory picard_solve(const Matrix& h_s, const KernelOperator& kernel,
                        const Vector& psi0, int k0, const Clock& clock,
                        int max_iter, double tol);

// Midpoint product formula for separable interactions:
//   V = prod_{m=k-1..k0} exp(-i (H_S + lambda sum_i f_i(t_m + dt/2) S_i) dt)
// with f at midpoints by linear interpolation of the samples.
Propagator time_ordered_propagator(const Matrix& h_s, const InteractionSpec& inter,
                                   int k, int k0, const Clock& clock);
std::vector<Propagator> time_ordered_propagators(const Matrix& h_s,
                                                 const InteractionSpec& inter,
                                                 int k0, const Clock& clock);

// || V(t3,t2) V(t2,t1) - V(t3,t1) ||_F with series propagators of the given order
double composition_residual(const Matrix& h_s, const KernelOperator& kernel, int order,
                            int k1, int k2, int k3, const Clock& clock);

// sum_j Im <psi_S(t_k)| K(k,j) |psi_S(t_j)>; vanishing for all k is the
// norm-preservation condition on the interaction. On solutions of the modified
// equation it equals (1/2) d/dt ||psi_S(t_k)||^2 up to O(dt^2).
double norm_preservation_functional(const KernelOperator& kernel, const Trajectory& traj,
                                    int k);

}  // namespace cqdyn
