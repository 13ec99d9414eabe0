#include "cqdyn/clock.hpp"

#include <cmath>
#include <numbers>

namespace cqdyn {

namespace {
constexpr double kPi = std::numbers::pi;
}

void ClockSpec::validate() const {
  if (dim < 2) throw Error("clock: dimension must be at least 2, got " + std::to_string(dim));
  if (!(dt > 0.0)) throw Error("clock: dt must be positive");
}

Clock build_clock(const ClockSpec& spec) {
  spec.validate();
  const int d = spec.dim;

  Clock clock;
  clock.spec = spec;
  clock.times.resize(d);
  for (int k = 0; k < d; ++k) clock.times[k] = spec.t0 + k * spec.dt;

  // symmetric frequency range, m in {-floor(d/2), ..., ceil(d/2)-1}
  clock.frequencies.resize(d);
  for (int m = 0; m < d; ++m)
    clock.frequencies(m) = 2.0 * kPi * (m - d / 2) / (d * spec.dt);

  clock.time_operator = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) clock.time_operator(k, k) = clock.times[k];

  // <t_k|E_m> = exp(+i omega_m t_k)/sqrt(d); the sign is what makes
  // exp(-i H_C dt) advance the clock by one grid step
  clock.fourier.resize(d, d);
  const double root = std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m)
      clock.fourier(k, m) =
          std::polar(1.0 / root, clock.frequencies(m) * clock.times[k]);

  Matrix h = clock.fourier * clock.frequencies.cast<Complex>().asDiagonal() *
             clock.fourier.adjoint();
  clock.hamiltonian = (h + h.adjoint()) / 2.0;
  return clock;
}

Vector clock_state(const Clock& clock, int k) {
  if (k < 0 || k >= clock.dim())
    throw DimensionError("clock_state: index " + std::to_string(k) +
                         " out of range for d = " + std::to_string(clock.dim()));
  Vector v = Vector::Zero(clock.dim());
  v(k) = 1.0;
  return v;
}

double commutator_defect(const Clock& clock) {
  const int d = clock.dim();
  Matrix defect = clock.time_operator * clock.hamiltonian -
                  clock.hamiltonian * clock.time_operator;
  defect -= Complex(0.0, 1.0) * Matrix::Identity(d, d);

  double worst = 0.0;
  for (int c = d / 4; c <= (3 * d) / 4 && c < d; ++c) {
    Vector probe(d);
    for (int k = 0; k < d; ++k) {
      const double w = std::min(std::abs(k - c), d - std::abs(k - c));
      probe(k) = std::exp(-kPi * w * w / d);
    }
    probe /= probe.norm();
    worst = std::max(worst, (defect * probe).norm());
  }
  return worst;
}

namespace {

Matrix step_operator(const Clock& clock, double s) {
  const Vector phases =
      (Complex(0.0, -s) * clock.frequencies.cast<Complex>().array()).exp();
  return clock.fourier * phases.asDiagonal() * clock.fourier.adjoint();
}

}  // namespace

double translation_defect(const Clock& clock) {
  const int d = clock.dim();
  const Matrix step = step_operator(clock, clock.spec.dt);
  double worst = 0.0;
  for (int k = 0; k < d; ++k) {
    Vector expected = Vector::Zero(d);
    expected((k + 1) % d) = 1.0;
    worst = std::max(worst, (step.col(k) - expected).norm());
  }
  return worst;
}

double periodicity_defect(const Clock& clock) {
  return (step_operator(clock, clock.spec.period()) -
          Matrix::Identity(clock.dim(), clock.dim()))
      .norm();
}

}  // namespace cqdyn
