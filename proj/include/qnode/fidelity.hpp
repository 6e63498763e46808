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

// fidelity.hpp: overlap of a two-qubit state with the closest maximally
// entangled state (the entangled fraction).

#pragma once

#include "qnode/qlin.hpp"

namespace qnode::fidelity {

/// rho = (1 x 1 + a.sigma x 1 + 1 x b.sigma + sum t_mn sigma_m x sigma_n) / 4
struct PauliDecomposition {
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  RealMatrix3 t = RealMatrix3::Zero();

  ComplexMatrix reconstruct() const;
};

/// Target state (|00> + |11>)/sqrt(2) in the computational basis.
ComplexVector target_bell_state();

PauliDecomposition pauli_decompose(const DensityMatrix& rho);

/// Closed form through the singular values of the correlation matrix T,
/// with the sign of det(T) deciding whether the smallest singular value
/// adds or subtracts.
double entangled_fraction_fidelity(const DensityMatrix& rho);

/// Overlap <target|(U1 x U2) rho (U1 x U2)^dagger|target>.
double local_overlap(const ComplexMatrix& rho, const ComplexMatrix& u1, const ComplexMatrix& u2);

/// SU(2) element from three Euler angles: Rz(alpha) Ry(beta) Rz(gamma).
ComplexMatrix su2(double alpha, double beta, double gamma);

/// Brute-force maximization over local unitaries: a grid of
/// grid_density^3 Euler-angle points, then coordinate descent over all six
/// angles of U1 x U2. The grid runs over U1 only with U2 = 1, which loses
/// nothing because (A x B)|target> = (A B^T x 1)|target>.
/// Returns a lower bound that converges to the closed form from below.
double fidelity_oracle(const DensityMatrix& rho, int grid_density);

}  // namespace qnode::fidelity
