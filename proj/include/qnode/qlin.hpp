// Copyright 2026 The qnode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qlin.hpp: dense complex linear algebra shared by every module.
//
// All matrices are dense Eigen matrices. The largest Hilbert space handled
// anywhere in the project is a few hundred dimensions, so nothing here
// bothers with sparse storage.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace qnode {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Thrown when a physical object (state, channel, config) violates its invariants.
class PhysicsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace qlin {

/// Eigenvalues below this are treated as a genuinely non-physical state.
inline constexpr double kEigenFloor = -1e-9;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;

ComplexMatrix identity(int dim);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
/// Pauli matrix by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
ComplexMatrix pauli(int index);

ComplexMatrix ket_bra(const ComplexVector& ket, const ComplexVector& bra);
ComplexMatrix projector(const ComplexVector& ket);

/// Kronecker product; entry (i*rows(b)+k, j*cols(b)+l) = a(i,j)*b(k,l).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron(std::initializer_list<ComplexMatrix> factors);

bool is_hermitian(const ComplexMatrix& m, double tol = 1e-9);

/// Partial trace over every subsystem except `keep`. Works on any square
/// operator whose dimension equals the product of `dims`.
ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const int> dims, int keep);

struct EigenSystem {
  Eigen::VectorXd values;  ///< ascending
  ComplexMatrix vectors;   ///< columns are eigenvectors
};

/// Hermitian eigendecomposition. Throws PhysicsError on non-Hermitian input
/// (tolerance 1e-9 relative to the largest entry, with an absolute floor).
EigenSystem herm_eig(const ComplexMatrix& m);

/// Matrix exponential (Pade scaling-and-squaring).
ComplexMatrix expm(const ComplexMatrix& m);

/// Hermitian matrix function f applied through the eigendecomposition.
template <typename F>
ComplexMatrix herm_apply(const ComplexMatrix& m, F&& f) {
  const EigenSystem es = herm_eig(m);
  Eigen::VectorXcd mapped(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) mapped(i) = f(es.values(i));
  return es.vectors * mapped.asDiagonal() * es.vectors.adjoint();
}

struct Svd3 {
  Eigen::Vector3d s;  ///< s(0) >= s(1) >= s(2) >= 0
  RealMatrix3 v;
  RealMatrix3 w;      ///< t = v * diag(s) * w^T
};

Svd3 svd3(const RealMatrix3& t);

/// Trace norm distance 0.5 * ||a - b||_1 for Hermitian a, b.
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

/// Von Neumann entropy in nats; eigenvalues below 1e-15 contribute nothing.
double von_neumann_entropy(const ComplexMatrix& rho);

/// Column-stacked vec(m).
ComplexVector vec(const ComplexMatrix& m);
ComplexMatrix unvec(const ComplexVector& v, int rows, int cols);

}  // namespace qlin

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  /// Validates `m` and throws PhysicsError on any invariant violation.
  explicit DensityMatrix(ComplexMatrix m);

  /// Hermitian-symmetrizes, clips negative eigenvalues and renormalizes.
  /// Only meant for estimator outputs where tiny violations are numerical dust.
  static DensityMatrix project(const ComplexMatrix& m);
  static DensityMatrix pure(const ComplexVector& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  double purity() const;

  /// Reduced state on subsystem `keep` of a product space with sizes `dims`.
  DensityMatrix partial_trace(std::span<const int> dims, int keep) const;

 private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

}  // namespace qnode
