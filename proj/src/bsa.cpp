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

#include "qnode/bsa.hpp"

#include <cmath>
#include <string>

namespace qnode::bsa {
namespace {

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw PhysicsError(std::string("optics.") + name + " must lie in [0, 1]");
}

void require_retardance(double v, const char* name) {
  if (!(v >= 0.0 && v < 2.0 * kPi)) throw PhysicsError(std::string("optics.") + name + " must lie in [0, 2pi)");
}

Eigen::Matrix2cd rotation(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix2cd r;
  r << c, s, -s, c;
  return r;
}

}  // namespace

void OpticsConfig::validate() const {
  require_retardance(r_qwp, "r_qwp");
  require_retardance(r_hwp, "r_hwp");
  if (!std::isfinite(beta_qwp)) throw PhysicsError("optics.beta_qwp must be finite");
  if (!std::isfinite(beta_hwp)) throw PhysicsError("optics.beta_hwp must be finite");
  require_unit_interval(t_bs_H, "t_bs_H");
  require_unit_interval(t_bs_V, "t_bs_V");
  require_unit_interval(eps_A_H, "eps_A_H");
  require_unit_interval(eps_A_V, "eps_A_V");
  require_unit_interval(eps_B_H, "eps_B_H");
  require_unit_interval(eps_B_V, "eps_B_V");
  for (double e : eta) require_unit_interval(e, "eta");
}

OpticsConfig OpticsConfig::ideal() { return OpticsConfig{}; }

OpticsConfig OpticsConfig::measured() {
  OpticsConfig c;
  c.r_qwp = 0.217 * 2.0 * kPi;
  c.r_hwp = 0.449 * 2.0 * kPi;
  c.t_bs_H = 0.5283;
  c.t_bs_V = 0.5307;
  c.eps_A_H = extinction_to_leakage(12500.0);
  c.eps_A_V = extinction_to_leakage(700.0);
  c.eps_B_H = extinction_to_leakage(3000.0);
  c.eps_B_V = extinction_to_leakage(1900.0);
  return c;
}

ComplexMatrix waveplate_unitary(double retardance, double angle) {
  Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
  d(0, 0) = 1.0;
  d(1, 1) = std::polar(1.0, -retardance);
  return rotation(-angle) * d * rotation(angle);
}

ComplexMatrix build_U_P(const OpticsConfig& cfg, const PhotonBasisSetting& setting) {
  cfg.validate();
  const ComplexMatrix hwp = waveplate_unitary(cfg.r_hwp, setting.hwp_angle + cfg.beta_hwp);
  const ComplexMatrix qwp = waveplate_unitary(cfg.r_qwp, setting.qwp_angle + cfg.beta_qwp);
  const ComplexMatrix plates = qwp * hwp;

  // Amplitude of polarization q reaching detector h. The polarizing splitters
  // keep the photon polarization, so each detector sees two orthogonal modes.
  const double tH = cfg.t_bs_H, tV = cfg.t_bs_V;
  const double amp[kDetectors][2] = {
      {std::sqrt(tH * (1.0 - cfg.eps_A_V)), std::sqrt(tV * cfg.eps_A_H)},
      {std::sqrt(tH * cfg.eps_A_V), std::sqrt(tV * (1.0 - cfg.eps_A_H))},
      {std::sqrt((1.0 - tH) * (1.0 - cfg.eps_B_V)), std::sqrt((1.0 - tV) * cfg.eps_B_H)},
      {std::sqrt((1.0 - tH) * cfg.eps_B_V), std::sqrt((1.0 - tV) * (1.0 - cfg.eps_B_H))},
  };
  ComplexMatrix up = ComplexMatrix::Zero(2 * kDetectors, 2);
  for (int h = 0; h < kDetectors; ++h)
    for (int q = 0; q < 2; ++q) up.row(2 * h + q) = amp[h][q] * plates.row(q);
  return up;
}

PhotonPOVM build_povm(const OpticsConfig& cfg, const PhotonBasisSetting& setting) {
  const ComplexMatrix up = build_U_P(cfg, setting);
  PhotonPOVM povm;
  ComplexMatrix sum = ComplexMatrix::Zero(2, 2);
  for (int h = 0; h < kDetectors; ++h) {
    ComplexMatrix pi = ComplexMatrix::Zero(2, 2);
    for (int q = 0; q < 2; ++q) {
      const Eigen::RowVectorXcd row = up.row(2 * h + q);
      pi += cfg.eta[h] * row.adjoint() * row;
    }
    povm.click[h] = 0.5 * (pi + pi.adjoint());
    sum += povm.click[h];
  }
  povm.empty = qlin::identity(2) - sum;
  const auto es = qlin::herm_eig(povm.empty);
  if (es.values(0) < -1e-9) throw PhysicsError("photon POVM violates completeness: no-click element is not positive");
  return povm;
}

ComplexMatrix ion_rotation(const IonBasisSetting& setting) {
  const double c = std::cos(setting.vartheta / 2.0), s = std::sin(setting.vartheta / 2.0);
  const cplx mi(0.0, -1.0);
  ComplexMatrix u(2, 2);
  u << c, mi * std::polar(1.0, setting.varphi) * s, mi * std::polar(1.0, -setting.varphi) * s, c;
  return u;
}

ComplexMatrix ion_projector(const IonBasisSetting& setting, IonOutcome outcome) {
  const ComplexMatrix u = ion_rotation(setting);
  ComplexMatrix ket = ComplexMatrix::Zero(2, 2);
  const int s = outcome == IonOutcome::bright ? 0 : 1;
  ket(s, s) = 1.0;
  return u.adjoint() * ket * u;
}

std::vector<PhotonBasisSetting> photon_settings() {
  std::vector<PhotonBasisSetting> out;
  for (double hwp : {0.0, kPi / 8.0})
    for (double qwp : {0.0, kPi / 4.0}) out.push_back({hwp, qwp});
  return out;
}

std::vector<IonBasisSetting> ion_settings() {
  return {{kPi / 2.0, 0.0}, {kPi / 2.0, kPi / 4.0}, {kPi / 2.0, kPi / 2.0}, {kPi / 2.0, 3.0 * kPi / 4.0},
          {0.0, 0.0},       {0.0, 0.0}};
}

std::vector<TomographySetting> tomography_settings() {
  std::vector<TomographySetting> out;
  for (const auto& p : photon_settings())
    for (const auto& i : ion_settings()) out.push_back({p, i});
  return out;
}

}  // namespace qnode::bsa
