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

#include "qnode/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qnode::dynamics {
namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<cplx>;

constexpr double kTopPopulationLimit = 1e-4;
constexpr double kAbsTol = 1e-10;
constexpr double kRelTol = 1e-8;

int spin_z(int config, int qubit) { return ((config >> (1 - qubit)) & 1) ? -1 : 1; }

ComplexMatrix thermal_state(double n_bar, int dim) {
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  const double q = n_bar / (n_bar + 1.0);
  double norm = 0.0, w = 1.0;
  for (int n = 0; n < dim; ++n, w *= q) {
    rho(n, n) = w;
    norm += w;
  }
  return rho / norm;
}

// Driven, heated harmonic mode acting on one spin block rho_ab:
//   d rho/dt = -i (H_a rho - rho H_b) + ndot (D[a] + D[a^dagger]) rho,
//   H_x = s (alpha_x a^dagger + h.c. + beta_x a^dagger^2 + h.c.),
//   alpha_x = i g_x exp(i Delta t),  beta_x = -k_x exp(i Delta2 t).
struct ModeRhs {
  int n;
  double ga, gb, ka, kb;
  double detuning, detuning2;
  double ndot;
  double sign;
  const std::vector<double>* sq;  // sq[k] = sqrt(k)

  void operator()(const State& x, State& dxdt, double t) const {
    const std::vector<double>& r = *sq;
    const cplx e1 = std::polar(1.0, detuning * t), e2 = std::polar(1.0, detuning2 * t);
    const cplx aa = sign * cplx(0.0, ga) * e1, ab = sign * cplx(0.0, gb) * e1;
    const cplx ba = -sign * ka * e2, bb = -sign * kb * e2;
    const cplx aac = std::conj(aa), abc = std::conj(ab), bac = std::conj(ba), bbc = std::conj(bb);
    const bool second = ka != 0.0 || kb != 0.0;
    auto at = [&](int m, int k) { return x[static_cast<std::size_t>(m * n + k)]; };
    for (int m = 0; m < n; ++m) {
      const double dm = m + (m + 1 < n ? m + 1 : 0);
      for (int k = 0; k < n; ++k) {
        cplx left = 0.0, right = 0.0;
        if (m >= 1) left += aa * r[m] * at(m - 1, k);
        if (m + 1 < n) left += aac * r[m + 1] * at(m + 1, k);
        if (k + 1 < n) right += ab * r[k + 1] * at(m, k + 1);
        if (k >= 1) right += abc * r[k] * at(m, k - 1);
        if (second) {
          if (m >= 2) left += ba * r[m] * r[m - 1] * at(m - 2, k);
          if (m + 2 < n) left += bac * r[m + 1] * r[m + 2] * at(m + 2, k);
          if (k + 2 < n) right += bb * r[k + 1] * r[k + 2] * at(m, k + 2);
          if (k >= 2) right += bbc * r[k] * r[k - 1] * at(m, k - 2);
        }
        cplx d = cplx(0.0, -1.0) * (left - right);
        if (ndot != 0.0) {
          const double dk = k + (k + 1 < n ? k + 1 : 0);
          cplx diss = -0.5 * (dm + dk) * at(m, k);
          if (m + 1 < n && k + 1 < n) diss += r[m + 1] * r[k + 1] * at(m + 1, k + 1);
          if (m >= 1 && k >= 1) diss += r[m] * r[k] * at(m - 1, k - 1);
          d += ndot * diss;
        }
        dxdt[static_cast<std::size_t>(m * n + k)] = d;
      }
    }
  }
};

struct Segment {
  double t0, t1, sign;
};

std::vector<Segment> walsh_segments(const GateConfig& gate) {
  const double t = gate.effective_duration();
  if (gate.walsh_order == 0) return {{0.0, t, 1.0}};
  return {{0.0, t / 2.0, 1.0}, {t / 2.0, t, -1.0}};
}

struct ModeSpec {
  double detuning = 0.0;
  double detuning2 = 0.0;
  double ndot = 0.0;
  std::array<double, 4> g{};  // per spin configuration
  std::array<double, 4> k{};
};

// Integrates one block. Tracks the top Fock population when `diag` is set.
ComplexMatrix evolve_block(const ModeSpec& mode, int a, int b, const ComplexMatrix& rho0,
                           const std::vector<Segment>& segments, bool diag, double& top) {
  const int n = static_cast<int>(rho0.rows());
  std::vector<double> sq(static_cast<std::size_t>(n) + 2);
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::sqrt(static_cast<double>(i));
  State x(static_cast<std::size_t>(n) * n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(m * n + k)] = rho0(m, k);

  const std::size_t top_index = static_cast<std::size_t>((n - 1) * n + (n - 1));
  auto observe = [&](const State& s, double) {
    if (diag) top = std::max(top, s[top_index].real());
  };
  for (const Segment& seg : segments) {
    ModeRhs rhs{n, mode.g[a], mode.g[b], mode.k[a], mode.k[b], mode.detuning, mode.detuning2, mode.ndot, seg.sign, &sq};
    auto stepper = odeint::make_controlled(kAbsTol, kRelTol, odeint::runge_kutta_dopri5<State>());
    const double dt0 = (seg.t1 - seg.t0) * 1e-4;
    odeint::integrate_adaptive(stepper, rhs, x, seg.t0, seg.t1, dt0, observe);
  }
  ComplexMatrix out(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) out(m, k) = x[static_cast<std::size_t>(m * n + k)];
  return out;
}

std::array<ModeSpec, 2> mode_specs(const CrystalConfig& crystal, const GateConfig& gate, double omega, bool heating) {
  const ModeFrequencies w = crystal.modes();
  const double drive = w.oop - gate.delta;
  std::array<ModeSpec, 2> spec;
  spec[0].detuning = gate.delta;
  spec[1].detuning = w.ip - drive;
  spec[1].detuning2 = 2.0 * w.ip - drive;
  if (heating) {
    spec[0].ndot = crystal.heat_rate_oop;
    spec[1].ndot = crystal.heat_rate_ip;
  }
  for (int a = 0; a < 4; ++a) {
    for (int j = 0; j < 2; ++j) {
      const double z = spin_z(a, j);
      spec[0].g[a] += omega / 4.0 * z * gate.eta_oop[j];
      if (gate.ip_coupling) {
        spec[1].g[a] += omega / 4.0 * z * gate.eta_ip[j];
        if (gate.second_order) spec[1].k[a] += omega / 4.0 * z * gate.eta_ip[j] * gate.eta_ip[j] / 2.0;
      }
    }
  }
  return spec;
}

// Signed phase theta of exp(-i theta Z Z) seen on the (up up, up down)
// coherence, from a coherent vacuum-state evolution.
double vacuum_phase(const CrystalConfig& crystal, const GateConfig& gate, double omega) {
  const auto spec = mode_specs(crystal, gate, omega, false);
  const int dim = std::min(crystal.n_max, 30) + 1;
  const ComplexMatrix vac = thermal_state(0.0, dim);
  const auto segments = walsh_segments(gate);
  double top = 0.0;
  cplx c = 1.0;
  for (const ModeSpec& m : spec) {
    if (m.g[0] == 0.0 && m.g[1] == 0.0 && m.k[0] == 0.0 && m.k[1] == 0.0) continue;
    c *= evolve_block(m, 0, 1, vac, segments, false, top).trace();
  }
  return -std::arg(c) / 2.0;
}

}  // namespace

ModeFrequencies axial_mode_frequencies(double mu, double omega_1) {
  if (!(mu > 0.0) || !(omega_1 > 0.0)) throw PhysicsError("axial_mode_frequencies: mu and omega_1 must be positive");
  const double s = std::sqrt(1.0 + (mu - 1.0) * mu);
  return {omega_1 * std::sqrt((1.0 + mu + s) / mu), omega_1 * std::sqrt((1.0 + mu - s) / mu)};
}

double omega_1_from_ip(double mu, double omega_ip) {
  if (!(mu > 0.0) || !(omega_ip > 0.0)) throw PhysicsError("omega_1_from_ip: mu and omega_ip must be positive");
  const double s = std::sqrt(1.0 + (mu - 1.0) * mu);
  return omega_ip * std::sqrt(mu / (1.0 + mu - s));
}

void CrystalConfig::validate() const {
  if (!(mass_1 > 0.0)) throw PhysicsError("crystal.mass_1 must be positive");
  if (!(mass_2 > 0.0)) throw PhysicsError("crystal.mass_2 must be positive");
  if (!(omega_1 > 0.0)) throw PhysicsError("crystal.omega_1 must be positive");
  if (!(n_bar_oop >= 0.0)) throw PhysicsError("crystal.n_bar_oop must be non-negative");
  if (!(n_bar_ip >= 0.0)) throw PhysicsError("crystal.n_bar_ip must be non-negative");
  if (!(heat_rate_oop >= 0.0)) throw PhysicsError("crystal.heat_rate_oop must be non-negative");
  if (!(heat_rate_ip >= 0.0)) throw PhysicsError("crystal.heat_rate_ip must be non-negative");
  if (n_max < 3.0 * std::max(n_bar_oop, n_bar_ip) + 5.0)
    throw PhysicsError("crystal.n_max must be at least 3 * max(n_bar) + 5");
}

CrystalConfig CrystalConfig::sr88_ca43() {
  CrystalConfig c;
  c.omega_1 = omega_1_from_ip(c.mu(), 2.0 * kPi * 1.705e6);
  return c;
}

void GateConfig::validate() const {
  if (!(delta > 0.0)) throw PhysicsError("gate.delta must be positive");
  if (walsh_order != 0 && walsh_order != 1) throw PhysicsError("gate.walsh_order must be 0 or 1");
  if (!std::isfinite(duration)) throw PhysicsError("gate.duration must be finite");
  if (!(target_phase > 0.0)) throw PhysicsError("gate.target_phase must be positive");
  if (eta_oop[0] * eta_oop[1] == 0.0) throw PhysicsError("gate.eta_oop must be nonzero on both ions");
}

double GateConfig::effective_duration() const {
  return duration > 0.0 ? duration : (walsh_order + 1) * 2.0 * kPi / delta;
}

double calibrate_force(const CrystalConfig& crystal, const GateConfig& gate) {
  crystal.validate();
  gate.validate();
  const double t = gate.effective_duration();
  const double c12 = std::abs(gate.eta_oop[0] * gate.eta_oop[1]);
  double omega = 4.0 * std::sqrt(gate.target_phase * gate.delta / (2.0 * c12 * t));
  for (int it = 0; it < 40; ++it) {
    const double theta = std::abs(vacuum_phase(crystal, gate, omega));
    if (!(theta > 0.0)) throw PhysicsError("gate calibration: no geometric phase at this detuning");
    const double ratio = gate.target_phase / theta;
    omega *= std::sqrt(ratio);
    if (std::abs(ratio - 1.0) < 1e-11) return omega;
  }
  return omega;
}

BlockEvolution evolve_blocks(const CrystalConfig& crystal, const GateConfig& gate, double omega) {
  crystal.validate();
  gate.validate();
  const int dim = crystal.n_max + 1;
  const auto spec = mode_specs(crystal, gate, omega, true);
  const auto segments = walsh_segments(gate);
  BlockEvolution ev;
  const std::array<double, 2> nbar{crystal.n_bar_oop, crystal.n_bar_ip};
  std::array<ModeBlocks*, 2> out{&ev.oop, &ev.ip};
  for (int m = 0; m < 2; ++m) {
    const ComplexMatrix rho0 = thermal_state(nbar[m], dim);
    ev.max_top_population = std::max(ev.max_top_population, rho0(dim - 1, dim - 1).real());
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        double top = 0.0;
        out[m]->block[a][b] = evolve_block(spec[m], a, b, rho0, segments, a == b, top);
        if (b != a) out[m]->block[b][a] = out[m]->block[a][b].adjoint();
        ev.max_top_population = std::max(ev.max_top_population, top);
      }
  }
  return ev;
}

tomo::ChoiMatrix ideal_zz_gate(double theta) {
  ComplexMatrix u = ComplexMatrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a) u(a, a) = std::polar(1.0, -theta * spin_z(a, 0) * spin_z(a, 1));
  return tomo::choi_from_unitary(u);
}

GateResult gate_propagate(const CrystalConfig& crystal, const GateConfig& gate) {
  GateResult res;
  res.omega = gate.omega > 0.0 ? gate.omega : calibrate_force(crystal, gate);
  res.duration = gate.effective_duration();
  const BlockEvolution ev = evolve_blocks(crystal, gate, res.omega);
  res.max_top_population = ev.max_top_population;
  if (ev.max_top_population > kTopPopulationLimit)
    throw TruncationError("motional population in the highest Fock level reached " +
                          std::to_string(ev.max_top_population) + " (limit 1e-4); raise crystal.n_max above " +
                          std::to_string(crystal.n_max));
  res.choi = ComplexMatrix::Zero(16, 16);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      res.c(a, b) = ev.oop.block[a][b].trace() * ev.ip.block[a][b].trace();
      res.choi(a * 4 + a, b * 4 + b) = res.c(a, b) / 4.0;
    }
  for (int a = 0; a < 4; ++a) res.trace_error = std::max(res.trace_error, std::abs(res.c(a, a) - 1.0));
  res.phase = -std::arg(res.c(0, 1)) / 2.0;
  const double sign = res.phase < 0.0 ? -1.0 : 1.0;
  res.fidelity = tomo::process_fidelity(res.choi, ideal_zz_gate(sign * gate.target_phase));
  return res;
}

double spin_motion_mutual_information(const CrystalConfig& crystal, const GateConfig& gate, double omega,
                                      const ComplexVector& spin_state) {
  if (spin_state.size() != 4) throw std::invalid_argument("spin state must be a two-qubit vector");
  const ComplexVector psi = spin_state.normalized();
  const BlockEvolution ev = evolve_blocks(crystal, gate, omega);
  const int n = crystal.n_max + 1, dm = n * n;
  ComplexMatrix total = ComplexMatrix::Zero(4 * dm, 4 * dm);
  ComplexMatrix spin = ComplexMatrix::Zero(4, 4);
  ComplexMatrix motion = ComplexMatrix::Zero(dm, dm);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const cplx w = psi(a) * std::conj(psi(b));
      if (w == cplx(0.0)) continue;
      const ComplexMatrix blk = qlin::kron(ev.oop.block[a][b], ev.ip.block[a][b]);
      total.block(a * dm, b * dm, dm, dm) = w * blk;
      spin(a, b) = w * blk.trace();
      if (a == b) motion += w * blk;
    }
  auto herm = [](const ComplexMatrix& m) { return ComplexMatrix(0.5 * (m + m.adjoint())); };
  return qlin::von_neumann_entropy(herm(spin)) + qlin::von_neumann_entropy(herm(motion)) -
         qlin::von_neumann_entropy(herm(total));
}

std::array<ComplexMatrix, 3> iswap_local_layers() {
  const ComplexMatrix x = qlin::pauli_x(), z = qlin::pauli_z();
  const ComplexMatrix h = (x + z) / std::sqrt(2.0);
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(0, 0) = 1.0;
  s(1, 1) = cplx(0.0, 1.0);
  // Lx maps ZZ to -XX and Ly maps ZZ to -YY under conjugation.
  const ComplexMatrix lx = qlin::kron(h, h * x);
  const ComplexMatrix ly = qlin::kron(s * h, s * h * x);
  return {ly.adjoint(), lx.adjoint() * ly, lx};
}

ComplexMatrix iswap_unitary() {
  ComplexMatrix u = ComplexMatrix::Zero(4, 4);
  u(0, 0) = u(3, 3) = 1.0;
  u(1, 2) = u(2, 1) = cplx(0.0, 1.0);
  return u;
}

tomo::ChoiMatrix iswap_circuit(const tomo::ChoiMatrix& gate_channel, double sq_error, int phase_sign) {
  if (gate_channel.rows() != 16) throw PhysicsError("iswap_circuit: two-qubit gate channel expected");
  if (!(sq_error >= 0.0 && sq_error <= 1.0)) throw PhysicsError("iswap_circuit: sq_error must lie in [0, 1]");
  if (phase_sign != 1 && phase_sign != -1) throw PhysicsError("iswap_circuit: phase_sign must be +1 or -1");
  const auto layers = iswap_local_layers();
  std::array<tomo::ChoiMatrix, 3> local;
  for (int i = 0; i < 3; ++i) local[i] = tomo::choi_from_unitary(layers[i]);

  auto build = [&](const tomo::ChoiMatrix& g, double p) {
    const tomo::ChoiMatrix dep1 = tomo::depolarize(tomo::choi_identity(2), p);
    const tomo::ChoiMatrix dep = tomo::tensor_channels(dep1, dep1);
    tomo::ChoiMatrix c = tomo::compose(dep, local[0]);
    c = tomo::compose(g, c);
    c = tomo::compose(dep, tomo::compose(local[1], c));
    c = tomo::compose(g, c);
    return tomo::compose(dep, tomo::compose(local[2], c));
  };

  const tomo::ChoiMatrix ideal = build(ideal_zz_gate(kPi / 4.0), 0.0);
  if (tomo::process_fidelity(ideal, tomo::choi_from_unitary(iswap_unitary())) < 1.0 - 1e-9)
    throw std::logic_error("iswap_circuit: local-layer decomposition does not reproduce iSWAP");

  tomo::ChoiMatrix g = gate_channel;
  if (phase_sign < 0) {
    const tomo::ChoiMatrix flip = tomo::choi_from_unitary(qlin::kron(qlin::pauli_x(), qlin::identity(2)));
    g = tomo::compose(flip, tomo::compose(g, flip));
  }
  return build(g, sq_error);
}

MidCircuitResult midcircuit_detect(const DensityMatrix& state, double uniform) {
  if (state.dim() != 4) throw PhysicsError("midcircuit_detect: two-qubit state expected");
  ComplexMatrix down = ComplexMatrix::Zero(2, 2);
  down(1, 1) = 1.0;
  const ComplexMatrix p = qlin::kron(down, qlin::identity(2));
  const ComplexMatrix kept = p * state.matrix() * p;
  MidCircuitResult r;
  r.keep_probability = std::clamp(kept.trace().real(), 0.0, 1.0);
  if (r.keep_probability < 1e-12) return r;
  r.keep = uniform < r.keep_probability;
  if (r.keep) r.state = DensityMatrix::project(kept / r.keep_probability);
  return r;
}

void StorageNoiseConfig::validate() const {
  if (!(b_noise_rms >= 0.0)) throw PhysicsError("storage.b_noise_rms must be non-negative");
  if (!(sens_network >= 0.0)) throw PhysicsError("storage.sens_network must be non-negative");
  if (!(sens_memory >= 0.0)) throw PhysicsError("storage.sens_memory must be non-negative");
  if (!(leak_rate >= 0.0)) throw PhysicsError("storage.leak_rate must be non-negative");
  if (!(white_floor >= 0.0)) throw PhysicsError("storage.white_floor must be non-negative");
  if (dd_pulses < 0 || dd_pulses % 5 != 0) throw PhysicsError("storage.dd_pulses must be a non-negative multiple of 5");
  if (!(debye_waller_eta >= 0.0)) throw PhysicsError("storage.debye_waller_eta must be non-negative");
}

double coherence_time(const StorageNoiseConfig& noise, Qubit qubit) {
  const double sens = qubit == Qubit::network ? noise.sens_network : noise.sens_memory;
  const double rate = std::sqrt(2.0) * kPi * sens * noise.b_noise_rms;
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

tomo::ChoiMatrix storage_channel(const StorageNoiseConfig& noise, Qubit qubit, double t) {
  noise.validate();
  if (!(t >= 0.0)) throw PhysicsError("storage time must be non-negative");
  double coherence = std::exp(-noise.white_floor * t);
  if (noise.dd_pulses == 0) {
    const double u = t / coherence_time(noise, qubit);
    coherence *= std::exp(-u * u);
  }
  tomo::ChoiMatrix chi = ComplexMatrix::Zero(4, 4);
  chi(0, 0) = chi(3, 3) = 0.5;
  chi(0, 3) = chi(3, 0) = 0.5 * coherence;
  const double leak = noise.transported ? 0.0 : noise.leak_rate;
  return tomo::depolarize(chi, 1.0 - std::exp(-leak * t));
}

double rotation_scale(const StorageNoiseConfig& noise, Qubit qubit, double delta_nbar) {
  if (qubit == Qubit::memory) return 1.0;
  return std::exp(-noise.debye_waller_eta * noise.debye_waller_eta * delta_nbar);
}

std::vector<DDPulse> dd_sequence(int dd_pulses, double t) {
  if (dd_pulses < 0 || dd_pulses % 5 != 0)
    throw PhysicsError("dd_sequence: pulse count must be a non-negative multiple of 5");
  if (!(t >= 0.0)) throw PhysicsError("dd_sequence: duration must be non-negative");
  const int composites = dd_pulses / 5;
  const double deg = kPi / 180.0;
  const std::array<double, 5> phases{30.0 * deg, 0.0, 90.0 * deg, 0.0, 30.0 * deg};
  std::vector<DDPulse> out;
  for (int k = 0; k < composites; ++k) {
    const double center = (k + 0.5) * t / composites;
    for (double ph : phases) out.push_back({center, ph});
  }
  return out;
}

ComplexMatrix dd_propagator(const std::vector<DDPulse>& schedule, double t, double detuning) {
  auto free = [&](double dt) {
    ComplexMatrix f = ComplexMatrix::Zero(2, 2);
    f(0, 0) = std::polar(1.0, -detuning * dt / 2.0);
    f(1, 1) = std::polar(1.0, detuning * dt / 2.0);
    return f;
  };
  ComplexMatrix u = qlin::identity(2);
  double now = 0.0;
  for (const DDPulse& p : schedule) {
    u = free(p.time - now) * u;
    now = p.time;
    const ComplexMatrix axis = std::cos(p.phase) * qlin::pauli_x() + std::sin(p.phase) * qlin::pauli_y();
    u = (cplx(0.0, -1.0) * axis) * u;
  }
  return free(t - now) * u;
}

double dd_residual_phase(const std::vector<DDPulse>& schedule, double t, double detuning) {
  const ComplexMatrix w = dd_propagator(schedule, t, 0.0).adjoint() * dd_propagator(schedule, t, detuning);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(w);
  const auto ev = es.eigenvalues();
  return std::abs(std::arg(ev(0) / ev(1)));
}

TransferResult transfer_sequence(double delta_f, double rabi, double delay, double spectator_ratio) {
  if (!(delta_f > 0.0)) throw PhysicsError("transfer_sequence: delta_f must be positive");
  if (!(rabi > 0.0)) throw PhysicsError("transfer_sequence: rabi must be positive");
  if (!(delay >= 0.0)) throw PhysicsError("transfer_sequence: delay must be non-negative");
  constexpr int n = 6;
  auto flip = [](int i, int j) {
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    m(i, j) = m(j, i) = 1.0;
    return m;
  };
  auto pulse = [&](int i, int j, double angle) {
    return qlin::expm(cplx(0.0, -1.0) * (rabi / 2.0) * flip(i, j) * (angle / rabi));
  };

  auto sequence = [&](bool spectator) {
    ComplexMatrix u = pulse(3, 2, kPi) * pulse(1, 0, kPi);
    ComplexMatrix h = rabi / 2.0 * flip(5, 3);
    ComplexMatrix free = qlin::identity(n);
    if (spectator) {
      const double d = 2.0 * kPi * delta_f;
      ComplexMatrix p44 = ComplexMatrix::Zero(n, n);
      p44(4, 4) = 1.0;
      h += spectator_ratio * rabi / 2.0 * flip(4, 1) - d * p44;
      free = qlin::expm(cplx(0.0, 1.0) * d * delay * p44);
    }
    const ComplexMatrix half = qlin::expm(cplx(0.0, -1.0) * h * ((kPi / 2.0) / rabi));
    return ComplexMatrix(half * free * half * u);
  };

  const bool spectator = std::isfinite(delta_f);
  const ComplexMatrix u = sequence(spectator), u0 = sequence(false);
  const std::array<int, 2> in{2, 0}, out{5, 1};
  ComplexMatrix m(2, 2), m0(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      m(i, j) = u(out[i], in[j]);
      m0(i, j) = u0(out[i], in[j]);
    }
  const ComplexMatrix lost = qlin::identity(2) - m.adjoint() * m;

  TransferResult res;
  res.channel = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      ComplexMatrix e = ComplexMatrix::Zero(2, 2);
      e(i, j) = 1.0;
      const ComplexMatrix img = m0.adjoint() * (m * e * m.adjoint() + lost(j, i) * qlin::identity(2) / 2.0) * m0;
      res.channel.block(2 * i, 2 * j, 2, 2) = img / 2.0;
    }
  res.fidelity = tomo::process_fidelity(res.channel, tomo::choi_identity(2));
  return res;
}

}  // namespace qnode::dynamics
