#pragma once

#include <Eigen/Dense>
#include <complex>

#include "cqdyn/errors.hpp"

namespace cqdyn {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// entrywise tolerance below which a matrix counts as Hermitian
inline constexpr double kHermitianTol = 1e-12;

// Kronecker product with `a` as the slow index:
// result((i*b.rows()+k), (j*b.cols()+l)) = a(i,j) * b(k,l)
Matrix tensor_product(const Matrix& a, const Matrix& b);

// max_ij |a(i,j) - conj(a(j,i))|
double hermiticity_defect(const Matrix& a);
bool is_hermitian(const Matrix& a, double tol = kHermitianTol);
void require_hermitian(const Matrix& a, const std::string& what,
                       double tol = kHermitianTol);

struct EigenSystem {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns, same order
};

// dense Hermitian eigendecomposition; rejects non-Hermitian input
// with the defect magnitude in the error
EigenSystem hermitian_eig(const Matrix& a);

// exp(-i*t*h) assembled from the decomposition of the Hermitian generator h;
// unitary by construction
Matrix phase_exponential(const EigenSystem& es, double t);

// exp(a); taken through the spectral route when i*a is Hermitian (every
// exponential in this project is of that form), dense Pade fallback otherwise
Matrix matrix_exponential(const Matrix& a);

inline Matrix adjoint(const Matrix& a) { return a.adjoint(); }

Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& v);

inline double frobenius_norm(const Matrix& a) { return a.norm(); }
inline double vec_norm(const Vector& v) { return v.norm(); }

// conjugate-linear in the first argument
Complex inner(const Vector& u, const Vector& v);

}  // namespace cqdyn
