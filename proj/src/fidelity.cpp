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

#include "qnode/fidelity.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace qnode::fidelity {

ComplexMatrix PauliDecomposition::reconstruct() const {
  ComplexMatrix rho = qlin::identity(4);
  for (int k = 0; k < 3; ++k) {
    rho += a(k) * qlin::kron(qlin::pauli(k + 1), qlin::identity(2));
    rho += b(k) * qlin::kron(qlin::identity(2), qlin::pauli(k + 1));
    for (int n = 0; n < 3; ++n) rho += t(k, n) * qlin::kron(qlin::pauli(k + 1), qlin::pauli(n + 1));
  }
  return rho / 4.0;
}

ComplexVector target_bell_state() {
  ComplexVector psi = ComplexVector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  return psi;
}

PauliDecomposition pauli_decompose(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw PhysicsError("pauli_decompose: expected a two-qubit state");
  const ComplexMatrix& m = rho.matrix();
  PauliDecomposition d;
  for (int k = 0; k < 3; ++k) {
    d.a(k) = (m * qlin::kron(qlin::pauli(k + 1), qlin::identity(2))).trace().real();
    d.b(k) = (m * qlin::kron(qlin::identity(2), qlin::pauli(k + 1))).trace().real();
    for (int n = 0; n < 3; ++n) d.t(k, n) = (m * qlin::kron(qlin::pauli(k + 1), qlin::pauli(n + 1))).trace().real();
  }
  return d;
}

double entangled_fraction_fidelity(const DensityMatrix& rho) {
  const PauliDecomposition d = pauli_decompose(rho);
  const qlin::Svd3 svd = qlin::svd3(d.t);
  const double det = d.t.determinant();
  // det(T) == 0 forces s3 == 0, so either sign gives the same value.
  const double sign = det < 0.0 ? -1.0 : 1.0;
  return (1.0 + svd.s(0) + svd.s(1) - svd.s(2) * sign) / 4.0;
}

namespace {

Eigen::Matrix2cd su2_fixed(double alpha, double beta, double gamma) {
  const cplx e1 = std::polar(1.0, -(alpha + gamma) / 2.0), e2 = std::polar(1.0, (gamma - alpha) / 2.0);
  const double c = std::cos(beta / 2.0), s = std::sin(beta / 2.0);
  Eigen::Matrix2cd u;
  u << e1 * c, -e2 * s, std::conj(e2) * s, std::conj(e1) * c;
  return u;
}

double overlap_fixed(const Eigen::Matrix4cd& rho, const Eigen::Matrix2cd& u1, const Eigen::Matrix2cd& u2) {
  // phi = (U1 x U2)^dagger |target>, target = (|00> + |11>)/sqrt(2)
  const Eigen::Matrix2cd a = u1.adjoint(), b = u2.adjoint();
  Eigen::Vector4cd phi;
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) phi(2 * i + j) = r * (a(i, 0) * b(j, 0) + a(i, 1) * b(j, 1));
  return (phi.adjoint() * rho * phi)(0, 0).real();
}

}  // namespace

double local_overlap(const ComplexMatrix& rho, const ComplexMatrix& u1, const ComplexMatrix& u2) {
  const ComplexMatrix u = qlin::kron(u1, u2);
  const ComplexVector phi = u.adjoint() * target_bell_state();
  return (phi.adjoint() * rho * phi)(0, 0).real();
}

ComplexMatrix su2(double alpha, double beta, double gamma) { return su2_fixed(alpha, beta, gamma); }

double fidelity_oracle(const DensityMatrix& rho, int grid_density) {
  if (grid_density < 8) throw std::invalid_argument("fidelity_oracle: grid_density must be >= 8");
  if (rho.dim() != 4) throw PhysicsError("fidelity_oracle: expected a two-qubit state");
  const Eigen::Matrix4cd m = rho.matrix();
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();

  std::array<double, 6> best{};
  double best_value = -1.0;
  const int n = grid_density;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= n / 2; ++j)
      for (int k = 0; k < n; ++k) {
        const double al = 2.0 * kPi * i / n;
        const double be = kPi * j / (n / 2);
        const double ga = 2.0 * kPi * k / n;
        const double v = overlap_fixed(m, su2_fixed(al, be, ga), id);
        if (v > best_value) {
          best_value = v;
          best = {al, be, ga, 0.0, 0.0, 0.0};
        }
      }

  auto eval = [&](const std::array<double, 6>& x) {
    return overlap_fixed(m, su2_fixed(x[0], x[1], x[2]), su2_fixed(x[3], x[4], x[5]));
  };
  double step = 2.0 * kPi / n;
  while (step > 1e-9) {
    bool improved = false;
    for (int c = 0; c < 6; ++c)
      for (double dir : {1.0, -1.0}) {
        std::array<double, 6> trial = best;
        trial[c] += dir * step;
        const double v = eval(trial);
        if (v > best_value + 1e-15) {
          best_value = v;
          best = trial;
          improved = true;
        }
      }
    if (!improved) step *= 0.5;
  }
  return best_value;
}

}  // namespace qnode::fidelity
