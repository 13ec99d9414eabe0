#include "cqdyn/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cqdyn {

InteractionSpec InteractionSpec::make_none(double lambda) {
  InteractionSpec spec;
  spec.kind = InteractionKind::none;
  spec.lambda = lambda;
  return spec;
}

InteractionSpec InteractionSpec::make_separable(double lambda,
                                                std::vector<SeparableTerm> terms) {
  InteractionSpec spec;
  spec.kind = InteractionKind::separable;
  spec.lambda = lambda;
  spec.terms = std::move(terms);
  return spec;
}

InteractionSpec InteractionSpec::make_generic(double lambda, Matrix hbar) {
  InteractionSpec spec;
  spec.kind = InteractionKind::generic;
  spec.lambda = lambda;
  spec.hbar = std::move(hbar);
  return spec;
}

Matrix materialize_interaction(const InteractionSpec& inter, const Clock& clock,
                               int system_dim) {
  const int d = clock.dim();
  const Eigen::Index total = static_cast<Eigen::Index>(d) * system_dim;
  switch (inter.kind) {
    case InteractionKind::none:
      return Matrix::Zero(total, total);
    case InteractionKind::separable: {
      Matrix hbar = Matrix::Zero(total, total);
      for (std::size_t i = 0; i < inter.terms.size(); ++i) {
        const SeparableTerm& term = inter.terms[i];
        if (static_cast<int>(term.samples.size()) != d)
          throw DimensionError("interaction term " + std::to_string(i) + ": has " +
                               std::to_string(term.samples.size()) +
                               " samples for a clock of dimension " + std::to_string(d));
        if (term.coupling.rows() != system_dim || term.coupling.cols() != system_dim)
          throw DimensionError("interaction term " + std::to_string(i) +
                               ": coupling dimension mismatch");
        require_hermitian(term.coupling, "interaction term " + std::to_string(i));
        // f_i(T) (x) S_i with f_i(T) = diag(f_i(t_k)); off-diagonal blocks stay
        // exactly zero
        for (int k = 0; k < d; ++k)
          hbar.block(k * system_dim, k * system_dim, system_dim, system_dim) +=
              term.samples[k] * term.coupling;
      }
      return hbar;
    }
    case InteractionKind::generic:
      if (inter.hbar.rows() != total || inter.hbar.cols() != total)
        throw DimensionError("generic interaction: expected " + std::to_string(total) +
                             "x" + std::to_string(total) + " matrix, got " +
                             std::to_string(inter.hbar.rows()) + "x" +
                             std::to_string(inter.hbar.cols()));
      require_hermitian(inter.hbar, "generic interaction");
      return inter.hbar;
  }
  throw Error("materialize_interaction: unknown kind");
}

TotalHamiltonian assemble_total(const Clock& clock, const Matrix& h_s,
                                const InteractionSpec& inter) {
  require_hermitian(h_s, "system Hamiltonian");
  const int d = clock.dim();
  const int n = static_cast<int>(h_s.rows());

  TotalHamiltonian total;
  total.clock_dim = d;
  total.system_dim = n;
  total.lambda = inter.lambda;
  total.shift = 0.0;
  total.system = h_s;
  total.interaction = materialize_interaction(inter, clock, n);
  total.h = tensor_product(clock.hamiltonian, Matrix::Identity(n, n)) +
            tensor_product(Matrix::Identity(d, d), h_s) +
            inter.lambda * total.interaction;
  return total;
}

TotalHamiltonian apply_shift(const TotalHamiltonian& total, double shift) {
  TotalHamiltonian out = total;
  out.shift = total.shift + shift;
  out.system += shift * Matrix::Identity(total.system_dim, total.system_dim);
  out.h += shift * Matrix::Identity(total.h.rows(), total.h.cols());
  return out;
}

double default_constraint_tol(const TotalHamiltonian& total) {
  return 1e-10 * total.h.norm();
}

namespace {

double conditional_drift(const Vector& psi, int d, int n) {
  const double base = psi.segment(0, n).squaredNorm();
  double drift = 0.0;
  for (int k = 1; k < d; ++k)
    drift = std::max(drift, std::abs(psi.segment(k * n, n).squaredNorm() - base));
  return drift;
}

}  // namespace

PhysicalSector physical_states(const TotalHamiltonian& total, double tol,
                               bool auto_shift) {
  if (tol <= 0.0) tol = default_constraint_tol(total);
  const EigenSystem es = hermitian_eig(total.h);
  const int dim = static_cast<int>(es.values.size());

  int nearest = 0;
  for (int i = 1; i < dim; ++i)
    if (std::abs(es.values(i)) < std::abs(es.values(nearest))) nearest = i;

  PhysicalSector sector;
  sector.nearest_eigenvalue = es.values(nearest);

  std::vector<int> selected;
  for (int i = 0; i < dim; ++i)
    if (std::abs(es.values(i)) <= tol) selected.push_back(i);

  sector.total = total;
  if (selected.empty()) {
    if (!auto_shift) {
      std::ostringstream msg;
      msg << "no physical state within tol " << tol << "; nearest eigenvalue "
          << sector.nearest_eigenvalue;
      throw NoPhysicalStateError(msg.str(), sector.nearest_eigenvalue);
    }
    // absorb -E* into H_S: the previously nearest eigenspace becomes exact nulls
    sector.total = apply_shift(total, -es.values(nearest));
    const double window = 1e-12 * std::max(1.0, total.h.norm());
    for (int i = 0; i < dim; ++i)
      if (std::abs(es.values(i) - es.values(nearest)) <= window) selected.push_back(i);
  }

  const int d = total.clock_dim;
  const int n = total.system_dim;
  for (int idx : selected) {
    PhysicalState state;
    state.psi = es.vectors.col(idx);
    state.residual = (sector.total.h * state.psi).norm();
    state.conditional_norm_drift = conditional_drift(state.psi, d, n);
    sector.states.push_back(std::move(state));
  }
  std::stable_sort(sector.states.begin(), sector.states.end(),
                   [n](const PhysicalState& a, const PhysicalState& b) {
                     return a.psi.segment(0, n).norm() > b.psi.segment(0, n).norm();
                   });
  return sector;
}

Vector condition_block(const Vector& kinematical, int clock_dim, int system_dim, int k) {
  if (k < 0 || k >= clock_dim)
    throw DimensionError("condition: index " + std::to_string(k) +
                         " out of range for d = " + std::to_string(clock_dim));
  if (kinematical.size() != static_cast<Eigen::Index>(clock_dim) * system_dim)
    throw DimensionError("condition: kinematical vector has wrong dimension");
  return kinematical.segment(k * system_dim, system_dim);
}

Vector condition(const PhysicalState& phys, const Clock& clock, int k) {
  const int d = clock.dim();
  const int n = static_cast<int>(phys.psi.size()) / d;
  return condition_block(phys.psi, d, n, k);
}

Trajectory make_trajectory(const ClockSpec& spec, std::vector<Vector> states) {
  if (static_cast<int>(states.size()) != spec.dim)
    throw DimensionError("trajectory: expected " + std::to_string(spec.dim) +
                         " states, got " + std::to_string(states.size()));
  Trajectory traj;
  traj.clock = spec;
  traj.states = std::move(states);
  traj.norms.reserve(traj.states.size());
  for (const Vector& v : traj.states) traj.norms.push_back(v.norm());
  return traj;
}

Trajectory full_trajectory(const PhysicalState& phys, const Clock& clock) {
  std::vector<Vector> states;
  states.reserve(clock.dim());
  for (int k = 0; k < clock.dim(); ++k) states.push_back(condition(phys, clock, k));
  return make_trajectory(clock.spec, std::move(states));
}

Vector reconstruct(const Trajectory& traj, const Clock& clock) {
  const int d = clock.dim();
  if (traj.size() != d) throw DimensionError("reconstruct: trajectory/clock mismatch");
  const int n = traj.system_dim();
  Vector psi(static_cast<Eigen::Index>(d) * n);
  for (int k = 0; k < d; ++k) psi.segment(k * n, n) = traj.states[k];
  return psi;
}

Complex physical_inner_product(const PhysicalState& a, const PhysicalState& b,
                               const Clock& clock, int k) {
  return inner(condition(a, clock, k), condition(b, clock, k));
}

double inner_product_drift(const PhysicalState& a, const PhysicalState& b,
                           const Clock& clock) {
  const int d = clock.dim();
  std::vector<Complex> values(d);
  for (int k = 0; k < d; ++k) values[k] = physical_inner_product(a, b, clock, k);
  double drift = 0.0;
  for (int k = 0; k < d; ++k)
    for (int j = k + 1; j < d; ++j)
      drift = std::max(drift, std::abs(values[k] - values[j]));
  return drift;
}

PhysicalState normalize_physical(const PhysicalState& phys, const Clock& clock, int k0) {
  const Vector slot = condition(phys, clock, k0);
  const double norm = slot.norm();
  if (norm <= 1e-15 * phys.psi.norm())
    throw Error("normalize_physical: zero conditional norm at k0 = " + std::to_string(k0));
  PhysicalState out;
  out.psi = phys.psi / norm;
  out.residual = phys.residual / norm;
  const int d = clock.dim();
  const int n = static_cast<int>(phys.psi.size()) / d;
  out.conditional_norm_drift = [&] {
    const double base = out.psi.segment(static_cast<Eigen::Index>(k0) * n, n).squaredNorm();
    double drift = 0.0;
    for (int k = 0; k < d; ++k)
      drift = std::max(drift,
                       std::abs(out.psi.segment(static_cast<Eigen::Index>(k) * n, n)
                                    .squaredNorm() -
                                base));
    return drift;
  }();
  return out;
}

}  // namespace cqdyn
