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

// Shared fixtures for the unit tests.

#pragma once

#include "qnode/qlin.hpp"

#include <random>

namespace qnode::testing {

inline ComplexMatrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline ComplexMatrix random_hermitian(int dim, std::mt19937_64& rng) {
  const ComplexMatrix a = random_matrix(dim, dim, rng);
  return 0.5 * (a + a.adjoint());
}

/// Ginibre-distributed mixed state of the given rank.
inline ComplexMatrix random_density(int dim, std::mt19937_64& rng, int rank = -1) {
  const ComplexMatrix g = random_matrix(dim, rank > 0 ? rank : dim, rng);
  ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline ComplexVector random_ket(int dim, std::mt19937_64& rng) {
  ComplexVector v = random_matrix(dim, 1, rng).col(0);
  return v / v.norm();
}

inline ComplexMatrix random_unitary(int dim, std::mt19937_64& rng) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(dim, dim, rng));
  return qr.householderQ() * ComplexMatrix::Identity(dim, dim);
}

inline ComplexVector ket(std::initializer_list<cplx> amps) {
  ComplexVector v(static_cast<Eigen::Index>(amps.size()));
  int i = 0;
  for (cplx a : amps) v(i++) = a;
  return v;
}

/// Werner state p |Psi+><Psi+| + (1 - p) I/4 with Psi+ = (|00> + |11>)/sqrt(2).
inline ComplexMatrix werner(double p) {
  const double s = 1.0 / std::sqrt(2.0);
  const ComplexVector psi = ket({s, 0.0, 0.0, s});
  return p * psi * psi.adjoint() + (1.0 - p) * ComplexMatrix::Identity(4, 4) / 4.0;
}

}  // namespace qnode::testing
