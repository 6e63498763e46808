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

// protocol.hpp: Monte Carlo runs of the node's experimental sequences and
// the summary observables extracted from them.
//
// Every shot draws from its own Philox stream (seed, shot index), so the
// outcome of a run depends only on (configuration, seed, shots).

#pragma once

#include "qnode/bsa.hpp"
#include "qnode/dynamics.hpp"
#include "qnode/tomo.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qnode::protocol {

struct AttemptLoopConfig {
  double success_prob = 0.013;           ///< heralded photon per attempt
  double attempt_period = 1e-6;          ///< s
  double light_shift_per_attempt = 0.0;  ///< rad on the memory qubit
  double heating_per_attempt = 0.0;      ///< quanta added to the OOP mode

  void validate() const;
};

struct ProtocolConfig {
  bsa::OpticsConfig optics = bsa::OpticsConfig::measured();
  dynamics::CrystalConfig crystal = dynamics::CrystalConfig::sr88_ca43();
  dynamics::GateConfig gate;
  dynamics::StorageNoiseConfig storage;
  dynamics::TransferConfig transfer;
  AttemptLoopConfig loop;
  bool simulate_gate = false;   ///< false: ideal sigma_z sigma_z gate
  double sq_error = 0.0;        ///< depolarizing after each local layer of the iSWAP
  double state_prep_error = 0.0;///< depolarizing of the emitted ion-photon state
  double spam_error = 0.0;      ///< symmetric readout bit flip per ion
  double midcircuit_time = 130e-6;

  void validate() const;
};

/// Ion-photon state (|down, H> + |up, V>)/sqrt(2), ion (x) photon.
ComplexVector ion_photon_bell_state();

struct ShotRecord {
  int setting = 0;
  long long attempts_1 = 0;  ///< attempts of the photon that was finally kept
  long long attempts_2 = 0;
  int restarts = 0;          ///< mid-circuit rejections before success
  double storage_time = 0.0;
};

struct DetectorAnalysis {
  bool analyzed = false;
  double fidelity = 0.0;
  bool converged = false;
  std::optional<DensityMatrix> rho;
};

struct FidelityAnalysis {
  std::array<DetectorAnalysis, bsa::kDetectors> detectors;
  double average = 0.0;  ///< over analyzed detectors
  bool converged = true;
  std::vector<std::string> warnings;
};

/// Per-detector MLE and entangled-fraction fidelity. Detectors without
/// clicks are skipped with a warning.
FidelityAnalysis analyze_fidelity(const tomo::ClickDataset& data, const bsa::OpticsConfig& optics);

struct SequenceResult {
  tomo::ClickDataset pair_1;   ///< first photon with the stored (memory) ion
  tomo::ClickDataset pair_2;   ///< second photon with the network ion (two-photon runs only)
  std::vector<ShotRecord> shots;
  long long rejects = 0;
  double expected_rejects = 0.0;  ///< sum of (1 - keep probability) over mid-circuit checks
  std::optional<FidelityAnalysis> analysis_1;
  std::optional<FidelityAnalysis> analysis_2;
};

/// Two-photon sequence: photon 1, iSWAP to the logic qubit, mid-circuit
/// check (restart on rejection), transfer to memory, photon 2 with crosstalk
/// on the stored qubit, then storage for delta_t and readout of both ions.
/// Shot s uses tomography setting s mod 24 for both pairs.
SequenceResult run_two_photon_sequence(int shots, const ProtocolConfig& cfg, double delta_t, std::uint64_t seed,
                                       bool analyze = true);

/// Storage sequence: one photon, transfer to memory, storage with
/// the ion transported away from the laser and, when `dd` is set,
/// dynamical decoupling (cfg.storage.dd_pulses, or 40 if that is zero).
SequenceResult run_storage_sequence(int shots, const ProtocolConfig& cfg, double storage, bool dd, std::uint64_t seed,
                                    bool analyze = true);

struct RamseyResult {
  long long attempts = 0;
  double phase = 0.0;
  double phase_se = 0.0;
  double contrast = 0.0;
  double contrast_se = 0.0;
};

/// Memory-qubit Ramsey experiment of fixed length with the attempt loop
/// running for a fraction of it. Half of the shots analyze along x, half
/// along y.
RamseyResult run_ramsey_probe(double attempt_fraction, double total_time, const AttemptLoopConfig& loop,
                              const dynamics::StorageNoiseConfig& noise, int shots, std::uint64_t seed);

struct ThermometryResult {
  long long attempts = 0;
  double n_bar = 0.0;
  double n_bar_se = 0.0;
  double n_bar_true = 0.0;
};

/// Sideband-ratio thermometry of the OOP mode: red/blue sideband excitation
/// probabilities scale * r and scale, with r = n/(1+n); n is estimated as
/// r_hat/(1 - r_hat) from `shots` readouts per sideband.
ThermometryResult run_thermometry_probe(double attempt_fraction, double total_time, const AttemptLoopConfig& loop,
                                        double n_bar_base, int shots, std::uint64_t seed,
                                        double sideband_scale = 0.5);

/// Decoherence rate over entanglement rate.
double rate_ratio(double decoherence_rate, double entanglement_rate);

}  // namespace qnode::protocol
