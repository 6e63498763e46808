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

#include "qnode/qlin.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qnode::qlin {

ComplexMatrix identity(int dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexMatrix pauli(int index) {
  switch (index) {
    case 0: return identity(2);
    case 1: return pauli_x();
    case 2: return pauli_y();
    case 3: return pauli_z();
    default: throw std::out_of_range("pauli index must be 0..3");
  }
}

ComplexMatrix ket_bra(const ComplexVector& ket, const ComplexVector& bra) { return ket * bra.adjoint(); }

ComplexMatrix projector(const ComplexVector& ket) { return ket * ket.adjoint(); }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix kron(std::initializer_list<ComplexMatrix> factors) {
  ComplexMatrix out = ComplexMatrix::Ones(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const int> dims, int keep) {
  if (dims.empty() || keep < 0 || keep >= static_cast<int>(dims.size()))
    throw std::invalid_argument("partial_trace: subsystem index out of range");
  const long total = std::accumulate(dims.begin(), dims.end(), 1L, std::multiplies<>());
  if (m.rows() != total || m.cols() != total)
    throw std::invalid_argument("partial_trace: dims product " + std::to_string(total) +
                                " does not match matrix dimension " + std::to_string(m.rows()));
  long before = 1;
  for (int k = 0; k < keep; ++k) before *= dims[k];
  const long dk = dims[keep];
  const long after = total / (before * dk);

  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (long i = 0; i < dk; ++i)
    for (long j = 0; j < dk; ++j) {
      cplx acc = 0.0;
      for (long b = 0; b < before; ++b)
        for (long a = 0; a < after; ++a)
          acc += m((b * dk + i) * after + a, (b * dk + j) * after + a);
      out(i, j) = acc;
    }
  return out;
}

EigenSystem herm_eig(const ComplexMatrix& m) {
  if (!is_hermitian(m, 1e-9)) throw PhysicsError("herm_eig: matrix is not Hermitian");
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("herm_eig: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix expm(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("expm: matrix must be square");
  return m.exp();
}

Svd3 svd3(const RealMatrix3& t) {
  Eigen::JacobiSVD<RealMatrix3> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const EigenSystem es = herm_eig(a - b);
  return 0.5 * es.values.cwiseAbs().sum();
}

double von_neumann_entropy(const ComplexMatrix& rho) {
  const EigenSystem es = herm_eig(rho);
  double s = 0.0;
  for (double lam : es.values)
    if (lam > 1e-15) s -= lam * std::log(lam);
  return s;
}

ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols) throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

}  // namespace qnode::qlin

namespace qnode {

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) throw PhysicsError("density matrix must be square and non-empty");
  if (!m_.allFinite()) throw PhysicsError("density matrix has non-finite entries");
  if (!qlin::is_hermitian(m_, qlin::kHermitianTol)) throw PhysicsError("density matrix is not Hermitian");
  const cplx tr = m_.trace();
  if (std::abs(tr - 1.0) > qlin::kTraceTol) throw PhysicsError("density matrix trace is not 1");
  const auto es = qlin::herm_eig(m_);
  if (es.values(0) < qlin::kEigenFloor) throw PhysicsError("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::project(const ComplexMatrix& m) {
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  Eigen::VectorXd lam = solver.eigenvalues().cwiseMax(0.0);
  const double total = lam.sum();
  if (!(total > 0.0)) throw PhysicsError("cannot project a matrix with no positive spectrum");
  lam /= total;
  ComplexMatrix out = solver.eigenvectors() * lam.cast<cplx>().asDiagonal() * solver.eigenvectors().adjoint();
  out = 0.5 * (out + out.adjoint());
  return DensityMatrix(std::move(out), Unchecked{});
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw PhysicsError("cannot build a pure state from a zero vector");
  const ComplexVector u = psi / n;
  return DensityMatrix(qlin::projector(u));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(qlin::identity(dim) / static_cast<double>(dim));
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

DensityMatrix DensityMatrix::partial_trace(std::span<const int> dims, int keep) const {
  return DensityMatrix(qlin::partial_trace(m_, dims, keep), Unchecked{});
}

}  // namespace qnode
