#include "cqdyn/numeric.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <sstream>

namespace cqdyn {

Matrix tensor_product(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double hermiticity_defect(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("hermiticity_defect: matrix not square");
  return (a - a.adjoint().eval()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& a, double tol) {
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

void require_hermitian(const Matrix& a, const std::string& what, double tol) {
  if (a.rows() != a.cols())
    throw DimensionError(what + ": expected a square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  const double defect = hermiticity_defect(a);
  if (defect > tol) {
    std::ostringstream msg;
    msg << what << ": not Hermitian, defect " << defect << " exceeds " << tol;
    throw NotHermitianError(msg.str(), defect);
  }
}

EigenSystem hermitian_eig(const Matrix& a) {
  require_hermitian(a, "hermitian_eig");
  // symmetrize so roundoff in the input cannot leak into the decomposition
  Eigen::SelfAdjointEigenSolver<Matrix> solver((a + a.adjoint()) / 2.0);
  if (solver.info() != Eigen::Success)
    throw Error("hermitian_eig: eigensolver failed to converge");
  return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

Matrix phase_exponential(const EigenSystem& es, double t) {
  // exact at t = 0 so propagators satisfy V(t0, t0) = I with no roundoff
  if (t == 0.0) return Matrix::Identity(es.vectors.rows(), es.vectors.rows());
  const Vector phases =
      (Complex(0.0, -t) * es.values.cast<Complex>().array()).exp();
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

Matrix matrix_exponential(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("matrix_exponential: matrix not square");
  if (a.size() == 0) return a;
  const Matrix h = Complex(0.0, 1.0) * a;  // a = -i*h for Hermitian h
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermiticity_defect(h) <= kHermitianTol * scale)
    return phase_exponential(hermitian_eig(h), 1.0);
  return a.exp();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) +
                         " and " + std::to_string(b.rows()) + " do not match");
  return a * b;
}

Vector matvec(const Matrix& a, const Vector& v) {
  if (a.cols() != v.size())
    throw DimensionError("matvec: matrix has " + std::to_string(a.cols()) +
                         " columns, vector has " + std::to_string(v.size()));
  return a * v;
}

Complex inner(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw DimensionError("inner: vector sizes " + std::to_string(u.size()) + " and " +
                         std::to_string(v.size()) + " do not match");
  return u.dot(v);  // Eigen conjugates the first argument
}

}  // namespace cqdyn
