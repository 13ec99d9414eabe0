#include "cqdyn/evolution.hpp"

#include <cmath>
#include <sstream>

namespace cqdyn {

KernelOperator build_kernel(const InteractionSpec& inter, const Clock& clock,
                            int system_dim) {
  KernelOperator kernel;
  kernel.clock_dim = clock.dim();
  kernel.system_dim = system_dim;
  kernel.lambda = inter.lambda;
  kernel.full = inter.lambda * materialize_interaction(inter, clock, system_dim);
  return kernel;
}

double block_hermiticity_defect(const KernelOperator& kernel) {
  // adjoint(K(k,j)) == K(j,k) for all block pairs is entrywise Hermiticity of
  // the assembled matrix
  return hermiticity_defect(kernel.full);
}

Vector memory_term(const KernelOperator& kernel, const Trajectory& traj, int k) {
  const int d = kernel.clock_dim;
  const int n = kernel.system_dim;
  if (k < 0 || k >= d)
    throw DimensionError("memory_term: index " + std::to_string(k) + " out of range");
  if (traj.size() != d || traj.system_dim() != n)
    throw DimensionError("memory_term: trajectory/kernel dimension mismatch");
  Vector acc = Vector::Zero(n);
  for (int j = 0; j < d; ++j) acc += kernel.block(k, j) * traj.states[j];
  return acc;
}

namespace {

double residual_rows(const KernelOperator& kernel, const Matrix& h_s,
                     const Trajectory& traj, int k_begin, int k_end) {
  const int d = traj.size();
  const double dt = traj.clock.dt;
  double worst = 0.0;
  for (int k = k_begin; k < k_end; ++k) {
    const Vector derivative =
        (traj.states[(k + 1) % d] - traj.states[(k + d - 1) % d]) / (2.0 * dt);
    const Vector row = Complex(0.0, 1.0) * derivative - h_s * traj.states[k] -
                       memory_term(kernel, traj, k);
    worst = std::max(worst, row.norm());
  }
  return worst;
}

}  // namespace

double residual_modified_se(const KernelOperator& kernel, const Matrix& h_s,
                            const Trajectory& traj) {
  return residual_rows(kernel, h_s, traj, 0, traj.size());
}

double residual_modified_se_interior(const KernelOperator& kernel, const Matrix& h_s,
                                     const Trajectory& traj) {
  return residual_rows(kernel, h_s, traj, 1, traj.size() - 1);
}

double isometry_defect(const Matrix& v) {
  return (v.adjoint() * v - Matrix::Identity(v.cols(), v.cols())).norm();
}

Propagator schrodinger_propagator(const Matrix& h_s, int k, int k0, const Clock& clock) {
  const int d = clock.dim();
  if (k < 0 || k >= d || k0 < 0 || k0 >= d)
    throw DimensionError("schrodinger_propagator: grid index out of range");
  const EigenSystem es = hermitian_eig(h_s);
  Propagator prop;
  prop.v = phase_exponential(es, clock.times[k] - clock.times[k0]);
  prop.k_from = k0;
  prop.k_to = k;
  prop.order = 0;
  prop.isometry_defect = isometry_defect(prop.v);
  return prop;
}

namespace {

// V_m on the whole grid for m = 0..order. The s-integral is an oriented
// trapezoid from t_k0, so grid points below k0 (needed by the kernel sum at
// order >= 2) carry the negated weights.
std::vector<Matrix> series_sum_grid(const Matrix& h_s, const KernelOperator& kernel,
                                    int order, int k0, const Clock& clock) {
  const int d = clock.dim();
  const int n = static_cast<int>(h_s.rows());
  if (kernel.clock_dim != d || kernel.system_dim != n)
    throw DimensionError("series_propagator: kernel/clock/system dimension mismatch");
  if (k0 < 0 || k0 >= d)
    throw DimensionError("series_propagator: k0 out of range");
  if (order < 0) throw DimensionError("series_propagator: order must be >= 0");
  const double dt = clock.spec.dt;

  const EigenSystem es = hermitian_eig(h_s);
  std::vector<Matrix> u(d);
  for (int k = 0; k < d; ++k)
    u[k] = phase_exponential(es, clock.times[k] - clock.times[k0]);

  std::vector<Matrix> layer = u;  // V_0
  std::vector<Matrix> total = u;
  std::vector<Matrix> g(d), integral(d);
  for (int m = 1; m <= order; ++m) {
    for (int s = 0; s < d; ++s) {
      Matrix acc = Matrix::Zero(n, n);
      for (int j = 0; j < d; ++j) acc += kernel.block(s, j) * layer[j];
      g[s] = u[s].adjoint() * acc;
    }
    integral[k0] = Matrix::Zero(n, n);
    for (int k = k0 + 1; k < d; ++k)
      integral[k] = integral[k - 1] + (dt / 2.0) * (g[k - 1] + g[k]);
    for (int k = k0 - 1; k >= 0; --k)
      integral[k] = integral[k + 1] - (dt / 2.0) * (g[k] + g[k + 1]);
    for (int k = 0; k < d; ++k) {
      layer[k] = Complex(0.0, -1.0) * u[k] * integral[k];
      total[k] += layer[k];
    }
  }
  return total;
}

}  // namespace

std::vector<Propagator> series_propagators(const Matrix& h_s, const KernelOperator& kernel,
                                           int order, int k0, const Clock& clock) {
  const std::vector<Matrix> total = series_sum_grid(h_s, kernel, order, k0, clock);
  std::vector<Propagator> out;
  out.reserve(clock.dim() - k0);
  for (int k = k0; k < clock.dim(); ++k) {
    Propagator prop;
    prop.v = total[k];
    prop.k_from = k0;
    prop.k_to = k;
    prop.order = order;
    prop.isometry_defect = isometry_defect(prop.v);
    out.push_back(std::move(prop));
  }
  return out;
}

Propagator series_propagator(const Matrix& h_s, const KernelOperator& kernel,
                             int order, int k, int k0, const Clock& clock) {
  if (k < k0)
    throw DimensionError("series_propagator: backward propagation (k < k0) is not defined");
  return series_propagators(h_s, kernel, order, k0, clock)[k - k0];
}

PicardResult picard_solve_detailed(const Matrix& h_s, const KernelOperator& kernel,
                                   const Vector& psi0, int k0, const Clock& clock,
                                   int max_iter, double tol) {
  const int d = clock.dim();
  const int n = static_cast<int>(h_s.rows());
  if (kernel.clock_dim != d || kernel.system_dim != n || psi0.size() != n)
    throw DimensionError("picard_solve: dimension mismatch");
  if (k0 < 0 || k0 >= d) throw DimensionError("picard_solve: k0 out of range");
  if (std::abs(psi0.norm() - 1.0) > 1e-10)
    throw Error("picard_solve: psi0 must be unit norm");
  if (max_iter < 1) throw Error("picard_solve: max_iter must be >= 1");
  const double dt = clock.spec.dt;

  const EigenSystem es = hermitian_eig(h_s);
  std::vector<Matrix> u(d);
  for (int k = 0; k < d; ++k)
    u[k] = phase_exponential(es, clock.times[k] - clock.times[k0]);

  std::vector<Vector> free(d), cur(d), next(d), g(d), integral(d);
  for (int k = 0; k < d; ++k) {
    free[k] = u[k] * psi0;
    cur[k] = free[k];
  }

  PicardResult result;
  double prev_update = 0.0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    // U(t_k, t_s) = u[k] u[s]^dag, so the s-dependence factors out of the sum
    for (int s = 0; s < d; ++s) {
      Vector mem = Vector::Zero(n);
      for (int j = 0; j < d; ++j) mem += kernel.block(s, j) * cur[j];
      g[s] = u[s].adjoint() * mem;
    }
    integral[k0] = Vector::Zero(n);
    for (int k = k0 + 1; k < d; ++k)
      integral[k] = integral[k - 1] + (dt / 2.0) * (g[k - 1] + g[k]);
    for (int k = k0 - 1; k >= 0; --k)
      integral[k] = integral[k + 1] - (dt / 2.0) * (g[k] + g[k + 1]);

    double update = 0.0;
    for (int k = 0; k < d; ++k) {
      next[k] = free[k] + Complex(0.0, -1.0) * (u[k] * integral[k]);
      update = std::max(update, (next[k] - cur[k]).norm());
    }
    result.update_norms.push_back(update);
    result.iterations = iter;
    cur.swap(next);

    if (update <= tol) {
      result.trajectory = make_trajectory(clock.spec, std::move(cur));
      return result;
    }
    const double ratio = prev_update > 0.0 ? update / prev_update : 0.0;
    if (update > 1e8) {
      std::ostringstream msg;
      msg << "picard_solve: diverging after " << iter << " iterations, contraction ratio "
          << ratio << " (reduce lambda or the period)";
      throw PicardDivergenceError(msg.str(), ratio, iter);
    }
    prev_update = update;
  }
  const double ratio = result.update_norms.size() > 1
                           ? result.update_norms.back() /
                                 result.update_norms[result.update_norms.size() - 2]
                           : 0.0;
  std::ostringstream msg;
  msg << "picard_solve: no convergence within " << max_iter
      << " iterations, last contraction ratio " << ratio
      << " (reduce lambda or the period)";
  throw PicardDivergenceError(msg.str(), ratio, max_iter);
}

Trajectory picard_solve(const Matrix& h_s, const KernelOperator& kernel,
                        const Vector& psi0, int k0, const Clock& clock,
                        int max_iter, double tol) {
  return picard_solve_detailed(h_s, kernel, psi0, k0, clock, max_iter, tol).trajectory;
}

std::vector<Propagator> time_ordered_propagators(const Matrix& h_s,
                                                 const InteractionSpec& inter,
                                                 int k0, const Clock& clock) {
  if (inter.kind != InteractionKind::separable)
    throw Error("time_ordered_propagator: requires a separable interaction");
  const int d = clock.dim();
  const int n = static_cast<int>(h_s.rows());
  if (k0 < 0 || k0 >= d)
    throw DimensionError("time_ordered_propagator: k0 out of range");
  require_hermitian(h_s, "system Hamiltonian");
  const double dt = clock.spec.dt;

  std::vector<Propagator> out;
  out.reserve(d - k0);
  Matrix v = Matrix::Identity(n, n);
  auto push = [&](int k) {
    Propagator prop;
    prop.v = v;
    prop.k_from = k0;
    prop.k_to = k;
    prop.order = kConvergedOrder;
    prop.isometry_defect = isometry_defect(prop.v);
    out.push_back(std::move(prop));
  };
  push(k0);
  for (int m = k0; m < d - 1; ++m) {
    Matrix h_mid = h_s;
    for (const SeparableTerm& term : inter.terms) {
      // midpoint value by linear interpolation of the samples
      const double f_mid = 0.5 * (term.samples[m] + term.samples[(m + 1) % d]);
      h_mid += inter.lambda * f_mid * term.coupling;
    }
    v = phase_exponential(hermitian_eig(h_mid), dt) * v;
    push(m + 1);
  }
  return out;
}

Propagator time_ordered_propagator(const Matrix& h_s, const InteractionSpec& inter,
                                   int k, int k0, const Clock& clock) {
  if (k < k0)
    throw DimensionError("time_ordered_propagator: backward propagation is not defined");
  return time_ordered_propagators(h_s, inter, k0, clock)[k - k0];
}

double composition_residual(const Matrix& h_s, const KernelOperator& kernel, int order,
                            int k1, int k2, int k3, const Clock& clock) {
  if (!(k1 < k2 && k2 < k3))
    throw DimensionError("composition_residual: requires k1 < k2 < k3");
  const std::vector<Propagator> from_k1 = series_propagators(h_s, kernel, order, k1, clock);
  const std::vector<Propagator> from_k2 = series_propagators(h_s, kernel, order, k2, clock);
  const Matrix& v21 = from_k1[k2 - k1].v;
  const Matrix& v31 = from_k1[k3 - k1].v;
  const Matrix& v32 = from_k2[k3 - k2].v;
  return (v32 * v21 - v31).norm();
}

double norm_preservation_functional(const KernelOperator& kernel, const Trajectory& traj,
                                    int k) {
  const int d = kernel.clock_dim;
  if (k < 0 || k >= d)
    throw DimensionError("norm_preservation_functional: index out of range");
  if (traj.size() != d || traj.system_dim() != kernel.system_dim)
    throw DimensionError("norm_preservation_functional: trajectory/kernel mismatch");
  double acc = 0.0;
  for (int j = 0; j < d; ++j)
    acc += std::imag(traj.states[k].dot(kernel.block(k, j) * traj.states[j]));
  return acc;
}

}  // namespace cqdyn
