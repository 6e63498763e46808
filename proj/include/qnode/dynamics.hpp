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

// dynamics.hpp: physics of the mixed-species node.
//
//  * axial normal modes of a two-ion crystal with mass ratio mu = m2 / m1,
//  * the Walsh-modulated light-shift sigma_z sigma_z gate under motional
//    heating (Lindblad master equation on both axial modes),
//  * the iSWAP circuit built from two such gates and mid-circuit detection,
//  * storage dephasing, Knill dynamical decoupling and the hyperfine
//    transfer sequence between logic and memory qubits.
//
// Two-qubit ordering is (network, logic). Spin index 0 = |up> (z = +1),
// 1 = |down> (z = -1), so configuration a = 2 * s_network + s_logic.
// Gate Lamb-Dicke arrays are indexed the same way: [0] network, [1] logic.

#pragma once

#include "qnode/tomo.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qnode::dynamics {

/// The Fock truncation was too small for the motional excitation reached.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModeFrequencies {
  double oop = 0.0;  ///< rad/s
  double ip = 0.0;   ///< rad/s
};

ModeFrequencies axial_mode_frequencies(double mu, double omega_1);
/// Inverse of the in-phase branch: the single-ion frequency omega_1 that puts
/// the in-phase mode at omega_ip.
double omega_1_from_ip(double mu, double omega_ip);

struct CrystalConfig {
  double mass_1 = 43.0;             ///< u
  double mass_2 = 88.0;             ///< u
  double omega_1 = 0.0;             ///< rad/s, single mass-1 ion
  double n_bar_oop = 0.3;
  double n_bar_ip = 3.0;
  double heat_rate_oop = 300.0;     ///< quanta/s, documented guess
  double heat_rate_ip = 3000.0;     ///< quanta/s, documented guess
  int n_max = 40;

  double mu() const { return mass_2 / mass_1; }
  ModeFrequencies modes() const { return axial_mode_frequencies(mu(), omega_1); }
  /// Throws PhysicsError naming the offending field.
  void validate() const;

  /// 88Sr+ / 43Ca+ crystal with the in-phase mode at 2 pi x 1.705 MHz.
  static CrystalConfig sr88_ca43();
};

struct GateConfig {
  double delta = 2.0 * kPi * 34e3;              ///< omega_oop - omega_drive, rad/s
  std::array<double, 2> eta_oop{0.10, -0.12};
  std::array<double, 2> eta_ip{0.08, 0.06};
  double omega = 0.0;                            ///< force amplitude, rad/s; <= 0 means calibrate
  int walsh_order = 1;
  double duration = 0.0;                         ///< s; <= 0 means (walsh_order + 1) 2 pi / delta
  bool ip_coupling = true;
  bool second_order = true;                      ///< second-harmonic term of the in-phase mode
  double target_phase = kPi / 4.0;               ///< |theta| of exp(-i theta Z Z)

  void validate() const;
  double effective_duration() const;
};

/// Result of one gate simulation. The channel is diagonal in the spin basis:
/// E(|a><b|) = c(a, b) |a><b|.
struct GateResult {
  tomo::ChoiMatrix choi;
  Eigen::Matrix4cd c;
  double omega = 0.0;
  double duration = 0.0;
  double phase = 0.0;              ///< signed theta of the realized exp(-i theta Z Z)
  double fidelity = 0.0;           ///< process fidelity to exp(-i theta_target Z Z) with the realized sign
  double max_top_population = 0.0;
  double trace_error = 0.0;
};

/// Force amplitude giving |theta| = target_phase with heating switched off.
double calibrate_force(const CrystalConfig& crystal, const GateConfig& gate);

/// Throws TruncationError when the population of the highest Fock level of
/// any mode exceeds 1e-4 during the evolution.
GateResult gate_propagate(const CrystalConfig& crystal, const GateConfig& gate);

/// Choi matrix of exp(-i theta Z Z).
tomo::ChoiMatrix ideal_zz_gate(double theta);

/// Final motional blocks rho_ab for one mode, a, b over the four spin
/// configurations (rho_ba = rho_ab^dagger is filled in).
struct ModeBlocks {
  std::array<std::array<ComplexMatrix, 4>, 4> block;
};

struct BlockEvolution {
  ModeBlocks oop;
  ModeBlocks ip;
  double max_top_population = 0.0;
};

BlockEvolution evolve_blocks(const CrystalConfig& crystal, const GateConfig& gate, double omega);

/// Quantum mutual information (nats) between the spins and both modes at
/// the end of the gate, for the given initial two-qubit pure state.
double spin_motion_mutual_information(const CrystalConfig& crystal, const GateConfig& gate, double omega,
                                      const ComplexVector& spin_state);

/// Local layers of the iSWAP construction: iSWAP = A2 G A1 G A0 up to a
/// global phase with G = exp(-i pi/4 Z Z).
std::array<ComplexMatrix, 3> iswap_local_layers();
ComplexMatrix iswap_unitary();

/// Two gate applications interleaved with the local layers. Every local
/// layer is followed by single-qubit depolarization of strength sq_error on
/// both qubits. phase_sign = -1 marks a gate realizing exp(+i pi/4 Z Z); it
/// is mapped back with X on the network qubit around the gate.
/// Throws std::logic_error if the built-in decomposition does not
/// reproduce iSWAP to 1e-9.
tomo::ChoiMatrix iswap_circuit(const tomo::ChoiMatrix& gate_channel, double sq_error, int phase_sign = 1);

struct MidCircuitResult {
  bool keep = false;
  double keep_probability = 0.0;
  std::optional<DensityMatrix> state;  ///< conditional two-qubit state when kept
};

/// Measures the network qubit: |down> keeps, |up> rejects. `uniform` in
/// [0, 1) selects the branch; keep probabilities below 1e-12 always reject.
MidCircuitResult midcircuit_detect(const DensityMatrix& state, double uniform);

enum class Qubit { network, memory };

struct StorageNoiseConfig {
  double b_noise_rms = 1e-8;      ///< T, quasi-static
  double sens_network = 2.8e10;   ///< Hz/T
  double sens_memory = 1.22e8;    ///< Hz/T
  double leak_rate = 0.0;         ///< 1/s, depolarizing
  bool transported = false;       ///< ion moved away from the laser: no leakage
  int dd_pulses = 0;              ///< Knill spin flips, multiple of 5
  double white_floor = 0.0;       ///< 1/s, dephasing left over under decoupling
  double debye_waller_eta = 0.0;  ///< network-qubit rotation sensitivity to heating

  void validate() const;
};

/// Gaussian coherence time T2* with 1/T2* = sqrt(2) pi sens b_rms.
double coherence_time(const StorageNoiseConfig& noise, Qubit qubit);

/// Single-qubit channel for a storage period t.
tomo::ChoiMatrix storage_channel(const StorageNoiseConfig& noise, Qubit qubit, double t);

/// Multiplicative error of single-qubit rotation angles after the motional
/// occupation grew by delta_nbar: exp(-eta^2 delta_nbar) on the network
/// qubit, exactly 1 on the memory qubit (co-propagating Raman beams).
double rotation_scale(const StorageNoiseConfig& noise, Qubit qubit, double delta_nbar);

struct DDPulse {
  double time = 0.0;   ///< s, instant of the pi pulse
  double phase = 0.0;  ///< rad, rotation axis in the xy plane
};

/// Knill composites (phases 30, 0, 90, 0, 30 degrees) centered at
/// (k + 1/2) t / n_composites. The five pulses of a composite are applied
/// back to back at its center.
std::vector<DDPulse> dd_sequence(int dd_pulses, double t);

/// Two-level propagator for a static detuning through the schedule.
ComplexMatrix dd_propagator(const std::vector<DDPulse>& schedule, double t, double detuning);
/// Rotation angle of U(0)^dagger U(detuning): the net phase left by a static detuning.
double dd_residual_phase(const std::vector<DDPulse>& schedule, double t, double detuning);

struct TransferConfig {
  double delta_f = 15e3;        ///< Hz, spectator detuning
  double t_pi = 20e-6;          ///< s
  double delay = 157e-6;        ///< s, between the two pi/2 pulses
  double spectator_ratio = 1.0; ///< spectator / main Rabi frequency
};

struct TransferResult {
  tomo::ChoiMatrix channel;  ///< error channel on the stored qubit relative to the ideal transfer
  double fidelity = 0.0;
};

/// Six-level ladder |3,3>, |3,0>, |4,4>, |3,1>, |4,1>, |4,0>: pi on
/// |3,3> -> |3,0>, pi on |4,4> -> |3,1>, then two pi/2 pulses on
/// |4,0> <-> |3,1> separated by `delay`, during which the |4,1> <-> |3,0>
/// transition is driven off-resonantly (detuned by delta_f). Population that
/// ends outside the memory qubit is replaced by the maximally mixed state.
/// delta_f = +inf removes the spectator.
TransferResult transfer_sequence(double delta_f, double rabi, double delay, double spectator_ratio = 1.0);

}  // namespace qnode::dynamics
