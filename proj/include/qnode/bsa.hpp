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

// bsa.hpp: photonic measurement model of the Bell state analyzer and the
// ion-qubit projectors used for ion-photon tomography.
//
// Conventions
//  * Photon polarization basis: index 0 = H, index 1 = V.
//  * Ion qubit basis: index 0 = |up>, index 1 = |down>. The "bright"
//    readout outcome corresponds to |0>.
//  * Detector indices: 0 = (arm A, H port), 1 = (arm A, V port),
//    2 = (arm B, H port), 3 = (arm B, V port). Arm A is the transmitted
//    port of the non-polarizing splitter.
//  * U_P rows are ordered (detector h, polarization q) -> 2*h + q.

#pragma once

#include "qnode/qlin.hpp"

#include <array>
#include <vector>

namespace qnode::bsa {

inline constexpr int kDetectors = 4;

struct OpticsConfig {
  double r_qwp = kPi / 2.0;   ///< quarter waveplate retardance, rad
  double r_hwp = kPi;         ///< half waveplate retardance, rad
  double beta_qwp = 0.0;      ///< fixed fast-axis offset added to the quarter waveplate setting, rad
  double beta_hwp = 0.0;      ///< fixed fast-axis offset added to the half waveplate setting, rad
  double t_bs_H = 0.5;        ///< power transmission into arm A for H
  double t_bs_V = 0.5;        ///< power transmission into arm A for V
  double eps_A_H = 0.0;       ///< fraction of V light leaking into the arm-A H port
  double eps_A_V = 0.0;       ///< fraction of H light leaking into the arm-A V port
  double eps_B_H = 0.0;
  double eps_B_V = 0.0;
  std::array<double, kDetectors> eta{1.0, 1.0, 1.0, 1.0};

  /// Throws PhysicsError naming the offending field.
  void validate() const;

  /// Ideal lossless analyzer: perfect waveplates, 50:50 splitter, no leakage.
  static OpticsConfig ideal();
  /// Independently characterized analyzer parameters of the experiment,
  /// with unit detector efficiencies.
  static OpticsConfig measured();
};

/// Extinction ratio quoted as "1:N" expressed as a leakage power fraction.
constexpr double extinction_to_leakage(double n) { return 1.0 / (1.0 + n); }

struct PhotonBasisSetting {
  double hwp_angle = 0.0;  ///< one of {0, pi/8}
  double qwp_angle = 0.0;  ///< one of {0, pi/4}
};

struct IonBasisSetting {
  double vartheta = 0.0;  ///< [0, pi]
  double varphi = 0.0;    ///< [0, 2pi)
};

enum class IonOutcome { bright = 0, dark = 1 };

struct PhotonPOVM {
  std::array<ComplexMatrix, kDetectors> click;  ///< Pi_0 .. Pi_3
  ComplexMatrix empty;                          ///< Pi_empty = 1 - sum_h Pi_h
};

/// Jones matrix of a retarder: R(-angle) diag(1, exp(-i r)) R(angle).
ComplexMatrix waveplate_unitary(double retardance, double angle);

/// 8x2 map from input polarization to the (detector, polarization) output modes.
/// Light passes the half waveplate, then the quarter waveplate (nearest the
/// PBS), then the non-polarizing splitter and one of the two PBS arms.
ComplexMatrix build_U_P(const OpticsConfig& cfg, const PhotonBasisSetting& setting);

/// Throws PhysicsError if the resulting no-click element is not positive
/// semidefinite beyond 1e-9 (e.g. a splitter transmission above one).
PhotonPOVM build_povm(const OpticsConfig& cfg, const PhotonBasisSetting& setting);

/// U_I(vartheta, varphi) as written in the ion-projector definition.
ComplexMatrix ion_rotation(const IonBasisSetting& setting);

/// Xi_s = U_I^dagger |s><s| U_I, with s = |0> for bright and |1> for dark.
ComplexMatrix ion_projector(const IonBasisSetting& setting, IonOutcome outcome);

struct TomographySetting {
  PhotonBasisSetting photon;
  IonBasisSetting ion;
};

inline constexpr int kPhotonSettings = 4;
inline constexpr int kIonSettings = 6;
inline constexpr int kTomographySettings = kPhotonSettings * kIonSettings;

std::vector<PhotonBasisSetting> photon_settings();
/// Four equatorial settings followed by the z setting listed twice.
std::vector<IonBasisSetting> ion_settings();
/// Photon-major product: index = photon * 6 + ion.
std::vector<TomographySetting> tomography_settings();

}  // namespace qnode::bsa
