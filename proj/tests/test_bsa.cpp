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

#include "helpers.hpp"

#include "qnode/bsa.hpp"

#include <doctest.h>

using namespace qnode;
using namespace qnode::testing;

namespace {

double min_eig(const ComplexMatrix& m) { return qlin::herm_eig(m).values(0); }

ComplexMatrix povm_sum(const bsa::PhotonPOVM& p) {
  ComplexMatrix s = p.empty;
  for (const auto& c : p.click) s += c;
  return s;
}

}  // namespace

TEST_CASE("waveplates") {
  for (double angle : {0.0, 0.3, 1.1}) CHECK(bsa::waveplate_unitary(0.0, angle).isApprox(qlin::identity(2)));
  const ComplexMatrix half = bsa::waveplate_unitary(kPi, 0.0);
  CHECK(std::abs(std::abs((half.adjoint() * qlin::pauli_z()).trace()) - 2.0) < 1e-12);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  const ComplexMatrix q = bsa::waveplate_unitary(0.217 * 2.0 * kPi, kPi / 4.0);
  CHECK((q.adjoint() * q - qlin::identity(2)).norm() < 1e-12);
  for (int i = 0; i < 200; ++i) {
    const ComplexMatrix w = bsa::waveplate_unitary(u(rng), u(rng));
    CHECK((w.adjoint() * w - qlin::identity(2)).norm() < 1e-12);
  }
  // Half waveplate at pi/8 maps H to D.
  const ComplexVector d = bsa::waveplate_unitary(kPi, kPi / 8.0) * ket({1.0, 0.0});
  CHECK(std::abs(std::abs(d(0)) - std::abs(d(1))) < 1e-12);
}

TEST_CASE("analyzer map") {
  const bsa::OpticsConfig ideal = bsa::OpticsConfig::ideal();
  const ComplexMatrix up = bsa::build_U_P(ideal, {0.0, 0.0});
  REQUIRE(up.rows() == 8);
  REQUIRE(up.cols() == 2);
  // Mode index 2 * detector + polarization; H lands on (A,H) and (B,H).
  const ComplexVector out = up * ket({1.0, 0.0});
  for (int m = 0; m < 8; ++m) {
    const double expect = (m == 0 || m == 4) ? 0.5 : 0.0;
    CHECK(std::norm(out(m)) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK((up.adjoint() * up - qlin::identity(2)).norm() < 1e-12);

  const bsa::OpticsConfig s1 = bsa::OpticsConfig::measured();
  bsa::OpticsConfig s1_rot = s1;  // waveplates switched off to read the splitter alone
  s1_rot.r_hwp = 0.0;
  s1_rot.r_qwp = 0.0;
  const ComplexVector h = bsa::build_U_P(s1_rot, {0.0, 0.0}) * ket({1.0, 0.0});
  double arm_a = 0.0;
  for (int m = 0; m < 4; ++m) arm_a += std::norm(h(m));
  CHECK(arm_a == doctest::Approx(0.5283).epsilon(1e-12));

  const ComplexVector v = bsa::build_U_P(s1_rot, {0.0, 0.0}) * ket({0.0, 1.0});
  double a_h = 0.0, a_v = 0.0;
  for (int q = 0; q < 2; ++q) {
    a_h += std::norm(v(0 * 2 + q));
    a_v += std::norm(v(1 * 2 + q));
  }
  CHECK(a_h / a_v == doctest::Approx(1.0 / 12500.0).epsilon(1e-9));
}

TEST_CASE("detection POVM") {
  bsa::OpticsConfig ideal = bsa::OpticsConfig::ideal();
  for (const auto& s : bsa::photon_settings()) {
    const auto p = bsa::build_povm(ideal, s);
    CHECK(p.empty.norm() < 1e-12);
  }
  ideal.eta = {0.0, 0.0, 0.0, 0.0};
  CHECK(bsa::build_povm(ideal, {0.0, 0.0}).empty.isApprox(qlin::identity(2)));

  bsa::OpticsConfig s1 = bsa::OpticsConfig::measured();
  s1.eta = {0.5, 0.5, 0.5, 0.5};
  for (const auto& s : bsa::photon_settings())
    CHECK((povm_sum(bsa::build_povm(s1, s)) - qlin::identity(2)).norm() < 1e-10);

  // Random valid configurations.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    bsa::OpticsConfig c;
    c.r_qwp = 2.0 * kPi * u(rng) * 0.999;
    c.r_hwp = 2.0 * kPi * u(rng) * 0.999;
    c.beta_qwp = u(rng);
    c.beta_hwp = u(rng);
    c.t_bs_H = u(rng);
    c.t_bs_V = u(rng);
    c.eps_A_H = 0.1 * u(rng);
    c.eps_A_V = 0.1 * u(rng);
    c.eps_B_H = 0.1 * u(rng);
    c.eps_B_V = 0.1 * u(rng);
    for (double& e : c.eta) e = u(rng);
    const auto settings = bsa::photon_settings();
    const auto p = bsa::build_povm(c, settings[i % 4]);
    CHECK((povm_sum(p) - qlin::identity(2)).norm() < 1e-9);
    for (const auto& e : p.click) CHECK(min_eig(e) >= -1e-10);
  }

  // No leakage, no waveplate rotation: diagonal in H/V.
  const auto diag = bsa::build_povm(bsa::OpticsConfig::ideal(), {0.0, 0.0});
  for (const auto& e : diag.click) CHECK(std::abs(e(0, 1)) < 1e-14);

  bsa::OpticsConfig bad = bsa::OpticsConfig::ideal();
  bad.t_bs_H = 1.2;
  CHECK_THROWS_AS(bsa::build_povm(bad, {0.0, 0.0}), PhysicsError);
  bad = bsa::OpticsConfig::ideal();
  bad.r_qwp = 7.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("optics.r_qwp"), PhysicsError);
}

TEST_CASE("ion projectors") {
  CHECK(bsa::ion_projector({0.0, 0.0}, bsa::IonOutcome::bright).isApprox(qlin::projector(ket({1.0, 0.0}))));
  CHECK(bsa::ion_projector({0.0, 0.0}, bsa::IonOutcome::dark).isApprox(qlin::projector(ket({0.0, 1.0}))));

  // U_I(pi/2, 0) = [[1, -i], [-i, 1]] / sqrt(2): bright projects onto (|0> + i|1>)/sqrt(2).
  const double s = 1.0 / std::sqrt(2.0);
  const ComplexMatrix bright = bsa::ion_projector({kPi / 2.0, 0.0}, bsa::IonOutcome::bright);
  const ComplexMatrix dark = bsa::ion_projector({kPi / 2.0, 0.0}, bsa::IonOutcome::dark);
  const ComplexVector plus_i = ket({s, cplx(0.0, s)}), minus_i = ket({s, cplx(0.0, -s)});
  CHECK((bright - qlin::projector(plus_i)).norm() < 1e-12);
  CHECK((dark - qlin::projector(minus_i)).norm() < 1e-12);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const bsa::IonBasisSetting st{kPi * u(rng), 2.0 * kPi * u(rng)};
    const ComplexMatrix b = bsa::ion_projector(st, bsa::IonOutcome::bright);
    CHECK((b + bsa::ion_projector(st, bsa::IonOutcome::dark) - qlin::identity(2)).norm() < 1e-12);
    CHECK((b * b - b).norm() < 1e-12);
  }
}

TEST_CASE("tomography settings") {
  const auto all = bsa::tomography_settings();
  CHECK(all.size() == 24);
  const auto ion = bsa::ion_settings();
  REQUIRE(ion.size() == 6);
  int z = 0;
  for (const auto& s : ion) z += s.vartheta == 0.0;
  CHECK(z == 2);
  for (int k = 0; k < 4; ++k) {
    CHECK(ion[k].vartheta == doctest::Approx(kPi / 2.0));
    CHECK(ion[k].varphi == doctest::Approx(k * kPi / 4.0));
  }
  const auto photon = bsa::photon_settings();
  REQUIRE(photon.size() == 4);
  for (int p = 0; p < 4; ++p)
    for (int j = 0; j < 6; ++j) {
      CHECK(all[p * 6 + j].photon.hwp_angle == photon[p].hwp_angle);
      CHECK(all[p * 6 + j].photon.qwp_angle == photon[p].qwp_angle);
      CHECK(all[p * 6 + j].ion.varphi == ion[j].varphi);
    }
}
