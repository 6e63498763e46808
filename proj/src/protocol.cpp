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

#include "qnode/protocol.hpp"

#include "qnode/fidelity.hpp"
#include "qnode/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <limits>

namespace qnode::protocol {
namespace {

constexpr std::uint32_t kShotStream = 0x5107u;

ComplexMatrix down_projector() {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(1, 1) = 1.0;
  return d;
}

ComplexMatrix rz(double phi) {
  ComplexMatrix u = ComplexMatrix::Zero(2, 2);
  u(0, 0) = std::polar(1.0, -phi / 2.0);
  u(1, 1) = std::polar(1.0, phi / 2.0);
  return u;
}

// Channels and models shared by every shot of a run.
struct Prepared {
  ComplexMatrix rho_ip;
  std::array<bsa::PhotonPOVM, bsa::kPhotonSettings> povm;
  std::vector<bsa::TomographySetting> settings;
  tomo::ChoiMatrix iswap;
  tomo::ChoiMatrix transfer;
};

Prepared prepare(const ProtocolConfig& cfg) {
  cfg.validate();
  Prepared p;
  const ComplexVector psi = ion_photon_bell_state();
  p.rho_ip = (1.0 - cfg.state_prep_error) * qlin::projector(psi) + cfg.state_prep_error * qlin::identity(4) / 4.0;
  const auto photon = bsa::photon_settings();
  for (int i = 0; i < bsa::kPhotonSettings; ++i) p.povm[i] = bsa::build_povm(cfg.optics, photon[i]);
  p.settings = bsa::tomography_settings();

  tomo::ChoiMatrix gate = dynamics::ideal_zz_gate(kPi / 4.0);
  int sign = 1;
  if (cfg.simulate_gate) {
    const dynamics::GateResult g = dynamics::gate_propagate(cfg.crystal, cfg.gate);
    gate = g.choi;
    sign = g.phase < 0.0 ? -1 : 1;
  }
  p.iswap = dynamics::iswap_circuit(gate, cfg.sq_error, sign);
  p.transfer = dynamics::transfer_sequence(cfg.transfer.delta_f, kPi / cfg.transfer.t_pi, cfg.transfer.delay,
                                           cfg.transfer.spectator_ratio)
                   .channel;
  return p;
}

struct PhotonEvent {
  long long trials = 0;  ///< attempts, including ones without a delivered photon
  int detector = -1;
  ComplexMatrix ion;     ///< conditional ion state
};

// Runs the attempt loop until a photon is detected. Delivered photons that
// do not click are booked as empties of the given setting.
PhotonEvent herald(const Prepared& p, const AttemptLoopConfig& loop, int setting, tomo::SettingCounts& counts,
                   rng::Philox& gen) {
  const bsa::PhotonPOVM& povm = p.povm[setting / bsa::kIonSettings];
  const ComplexMatrix id = qlin::identity(2);
  std::array<double, 5> probs{};
  probs[0] = (qlin::kron(id, povm.empty) * p.rho_ip).trace().real();
  for (int h = 0; h < bsa::kDetectors; ++h) probs[h + 1] = (qlin::kron(id, povm.click[h]) * p.rho_ip).trace().real();
  double total = 0.0;
  for (double& q : probs) total += (q = std::max(q, 0.0));
  if (probs[1] + probs[2] + probs[3] + probs[4] <= 0.0)
    throw PhysicsError("photon can never be detected with this analyzer configuration");

  PhotonEvent ev;
  for (;;) {
    ev.trials += rng::trials_until_success(loop.success_prob, gen);
    double u = gen.uniform() * total;
    int outcome = 0;
    while (outcome < 4 && u >= probs[outcome]) u -= probs[outcome++];
    if (outcome == 0) {
      ++counts.attempts;
      ++counts.n_empty;
      continue;
    }
    ev.detector = outcome - 1;
    const ComplexMatrix cond = qlin::kron(id, povm.click[ev.detector]) * p.rho_ip;
    const int dims[2] = {2, 2};
    ComplexMatrix ion = qlin::partial_trace(0.5 * (cond + cond.adjoint()), dims, 0);
    ev.ion = ion / ion.trace().real();
    return ev;
  }
}

int readout(const ComplexMatrix& rho, const ComplexMatrix& bright, double spam, rng::Philox& gen) {
  const double pb = std::clamp((bright * rho).trace().real(), 0.0, 1.0);
  const double p = (1.0 - spam) * pb + spam * (1.0 - pb);
  return gen.uniform() < p ? 0 : 1;
}

void book(tomo::SettingCounts& counts, int detector, int outcome) {
  ++counts.attempts;
  ++counts.clicks[detector];
  ++counts.ion[detector][outcome];
}

// Photon 1, iSWAP into the logic qubit with mid-circuit check, transfer to
// the memory qubit. Returns the stored memory state.
ComplexMatrix store_first(const ProtocolConfig& cfg, const Prepared& p, int setting, tomo::SettingCounts& counts,
                          rng::Philox& gen, SequenceResult& res, ShotRecord& rec, int& detector) {
  const ComplexMatrix down = down_projector();
  for (;;) {
    const PhotonEvent ev = herald(p, cfg.loop, setting, counts, gen);
    const ComplexMatrix two = tomo::apply_channel(p.iswap, qlin::kron(ev.ion, down));
    const dynamics::MidCircuitResult mc =
        dynamics::midcircuit_detect(DensityMatrix::project(two), gen.uniform());
    res.expected_rejects += 1.0 - mc.keep_probability;
    if (!mc.keep) {
      ++res.rejects;
      ++rec.restarts;
      continue;
    }
    rec.attempts_1 = ev.trials;
    detector = ev.detector;
    const int dims[2] = {2, 2};
    const ComplexMatrix logic = mc.state->partial_trace(dims, 1).matrix();
    const ComplexMatrix memory = tomo::apply_channel(p.transfer, logic);
    // The memory qubit idles while the network qubit is read out.
    return tomo::apply_channel(dynamics::storage_channel(cfg.storage, dynamics::Qubit::memory, cfg.midcircuit_time),
                               memory);
  }
}

ComplexMatrix apply_storage(const dynamics::StorageNoiseConfig& noise, dynamics::Qubit q, double t,
                            const ComplexMatrix& rho) {
  return tomo::apply_channel(dynamics::storage_channel(noise, q, t), rho);
}

}  // namespace

void AttemptLoopConfig::validate() const {
  if (!(success_prob > 0.0 && success_prob <= 1.0)) throw PhysicsError("loop.success_prob must lie in (0, 1]");
  if (!(attempt_period > 0.0)) throw PhysicsError("loop.attempt_period must be positive");
  if (!std::isfinite(light_shift_per_attempt)) throw PhysicsError("loop.light_shift_per_attempt must be finite");
  if (!(heating_per_attempt >= 0.0)) throw PhysicsError("loop.heating_per_attempt must be non-negative");
}

void ProtocolConfig::validate() const {
  optics.validate();
  crystal.validate();
  gate.validate();
  storage.validate();
  loop.validate();
  if (!(transfer.delta_f > 0.0)) throw PhysicsError("transfer.delta_f must be positive");
  if (!(transfer.t_pi > 0.0)) throw PhysicsError("transfer.t_pi must be positive");
  if (!(transfer.delay >= 0.0)) throw PhysicsError("transfer.delay must be non-negative");
  if (!(transfer.spectator_ratio >= 0.0)) throw PhysicsError("transfer.spectator_ratio must be non-negative");
  for (auto [v, name] : {std::pair{sq_error, "sq_error"}, std::pair{state_prep_error, "state_prep_error"},
                         std::pair{spam_error, "spam_error"}})
    if (!(v >= 0.0 && v <= 1.0)) throw PhysicsError("protocol." + std::string(name) + " must lie in [0, 1]");
  if (!(midcircuit_time >= 0.0)) throw PhysicsError("protocol.midcircuit_time must be non-negative");
}

ComplexVector ion_photon_bell_state() {
  ComplexVector psi = ComplexVector::Zero(4);
  psi(1 * 2 + 0) = 1.0 / std::sqrt(2.0);  // |down, H>
  psi(0 * 2 + 1) = 1.0 / std::sqrt(2.0);  // |up, V>
  return psi;
}

FidelityAnalysis analyze_fidelity(const tomo::ClickDataset& data, const bsa::OpticsConfig& optics) {
  data.validate();
  FidelityAnalysis out;
  const tomo::MeasurementModel model = tomo::measurement_model(data, optics);
  double sum = 0.0;
  int n = 0;
  for (int h = 0; h < bsa::kDetectors; ++h) {
    DetectorAnalysis& d = out.detectors[h];
    if (data.detector_clicks(h) == 0) {
      out.warnings.push_back("detector " + std::to_string(h) + " has no clicks; skipped");
      continue;
    }
    const tomo::MleFit fit = tomo::mle_fit(tomo::state_likelihood(data, h, model));
    d.rho = DensityMatrix::project(fit.rho);
    d.analyzed = true;
    d.converged = fit.converged;
    d.fidelity = fidelity::entangled_fraction_fidelity(*d.rho);
    if (!fit.converged) {
      out.converged = false;
      out.warnings.push_back("detector " + std::to_string(h) + ": likelihood maximization did not converge");
    }
    sum += d.fidelity;
    ++n;
  }
  out.average = n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
  return out;
}

SequenceResult run_two_photon_sequence(int shots, const ProtocolConfig& cfg, double delta_t, std::uint64_t seed,
                                       bool analyze) {
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  if (!(delta_t >= 0.0)) throw PhysicsError("delta_t must be non-negative");
  const Prepared p = prepare(cfg);
  SequenceResult res;
  res.pair_1 = tomo::empty_dataset();
  res.pair_2 = tomo::empty_dataset();
  res.pair_1.seed = res.pair_2.seed = seed;
  res.pair_1.label = "two-photon/pair-1";
  res.pair_2.label = "two-photon/pair-2";

  for (int s = 0; s < shots; ++s) {
    rng::Philox gen(seed, static_cast<std::uint32_t>(s), kShotStream);
    ShotRecord rec;
    rec.setting = s % bsa::kTomographySettings;
    const bsa::TomographySetting& st = p.settings[rec.setting];
    tomo::SettingCounts& c1 = res.pair_1.settings[rec.setting];
    tomo::SettingCounts& c2 = res.pair_2.settings[rec.setting];

    int det_1 = -1;
    ComplexMatrix memory = store_first(cfg, p, rec.setting, c1, gen, res, rec, det_1);

    const PhotonEvent ev2 = herald(p, cfg.loop, rec.setting, c2, gen);
    rec.attempts_2 = ev2.trials;
    const double loop_time = static_cast<double>(ev2.trials) * cfg.loop.attempt_period;
    const ComplexMatrix shift = rz(static_cast<double>(ev2.trials) * cfg.loop.light_shift_per_attempt);
    memory = shift * memory * shift.adjoint();
    rec.storage_time = loop_time + delta_t;
    memory = apply_storage(cfg.storage, dynamics::Qubit::memory, rec.storage_time, memory);
    const ComplexMatrix network = apply_storage(cfg.storage, dynamics::Qubit::network, delta_t, ev2.ion);

    // Heating of the shared mode scales the analysis rotations of the network ion.
    const double dn = static_cast<double>(ev2.trials) * cfg.loop.heating_per_attempt +
                      cfg.crystal.heat_rate_oop * delta_t;
    bsa::IonBasisSetting net_setting = st.ion;
    net_setting.vartheta *= dynamics::rotation_scale(cfg.storage, dynamics::Qubit::network, dn);

    const int o1 = readout(memory, bsa::ion_projector(st.ion, bsa::IonOutcome::bright), cfg.spam_error, gen);
    const int o2 = readout(network, bsa::ion_projector(net_setting, bsa::IonOutcome::bright), cfg.spam_error, gen);
    book(c1, det_1, o1);
    book(c2, ev2.detector, o2);
    res.shots.push_back(rec);
  }
  if (analyze) {
    res.analysis_1 = analyze_fidelity(res.pair_1, cfg.optics);
    res.analysis_2 = analyze_fidelity(res.pair_2, cfg.optics);
  }
  return res;
}

SequenceResult run_storage_sequence(int shots, const ProtocolConfig& cfg, double storage, bool dd, std::uint64_t seed,
                                    bool analyze) {
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  if (!(storage >= 0.0)) throw PhysicsError("storage time must be non-negative");
  const Prepared p = prepare(cfg);
  dynamics::StorageNoiseConfig noise = cfg.storage;
  noise.transported = true;
  noise.dd_pulses = dd ? (cfg.storage.dd_pulses > 0 ? cfg.storage.dd_pulses : 40) : 0;

  SequenceResult res;
  res.pair_1 = tomo::empty_dataset();
  res.pair_1.seed = seed;
  res.pair_1.label = dd ? "storage/dd" : "storage/no-dd";
  for (int s = 0; s < shots; ++s) {
    rng::Philox gen(seed, static_cast<std::uint32_t>(s), kShotStream);
    ShotRecord rec;
    rec.setting = s % bsa::kTomographySettings;
    const bsa::TomographySetting& st = p.settings[rec.setting];
    tomo::SettingCounts& c1 = res.pair_1.settings[rec.setting];
    int det = -1;
    ComplexMatrix memory = store_first(cfg, p, rec.setting, c1, gen, res, rec, det);
    // Sympathetic cooling between segments returns the motion to its
    // post-cooling occupation, and the memory qubit is insensitive to it.
    rec.storage_time = storage;
    memory = apply_storage(noise, dynamics::Qubit::memory, storage, memory);
    book(c1, det, readout(memory, bsa::ion_projector(st.ion, bsa::IonOutcome::bright), cfg.spam_error, gen));
    res.shots.push_back(rec);
  }
  if (analyze) res.analysis_1 = analyze_fidelity(res.pair_1, cfg.optics);
  return res;
}

RamseyResult run_ramsey_probe(double attempt_fraction, double total_time, const AttemptLoopConfig& loop,
                              const dynamics::StorageNoiseConfig& noise, int shots, std::uint64_t seed) {
  loop.validate();
  if (!(attempt_fraction >= 0.0 && attempt_fraction <= 1.0)) throw PhysicsError("attempt_fraction must lie in [0, 1]");
  if (!(total_time > 0.0)) throw PhysicsError("total_time must be positive");
  if (shots < 2) throw std::invalid_argument("shots must be at least 2");
  RamseyResult r;
  r.attempts = std::llround(attempt_fraction * total_time / loop.attempt_period);

  // |+> after the first pi/2 pulse, light shift, storage noise.
  ComplexVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  ComplexMatrix rho = qlin::projector(plus);
  const ComplexMatrix u = rz(static_cast<double>(r.attempts) * loop.light_shift_per_attempt);
  rho = u * rho * u.adjoint();
  rho = apply_storage(noise, dynamics::Qubit::memory, total_time, rho);

  const double px = std::clamp(0.5 + rho(0, 1).real(), 0.0, 1.0);
  const double py = std::clamp(0.5 - rho(0, 1).imag(), 0.0, 1.0);
  const long long nx = shots / 2, ny = shots - nx;
  rng::Philox gen(seed, 0, 0);
  const double fx = static_cast<double>(rng::binomial(nx, px, gen)) / static_cast<double>(nx);
  const double fy = static_cast<double>(rng::binomial(ny, py, gen)) / static_cast<double>(ny);
  const double x = 2.0 * fx - 1.0, y = 2.0 * fy - 1.0;
  // Binomial variances with a floor of one count, so a saturated bin still carries an error.
  const double vx = 4.0 * std::max(fx * (1.0 - fx), 1.0 / static_cast<double>(nx)) / static_cast<double>(nx);
  const double vy = 4.0 * std::max(fy * (1.0 - fy), 1.0 / static_cast<double>(ny)) / static_cast<double>(ny);
  r.contrast = std::hypot(x, y);
  r.phase = std::atan2(y, x);
  const double c2 = std::max(r.contrast * r.contrast, 1e-300);
  r.phase_se = std::sqrt((y * y * vx + x * x * vy) / (c2 * c2));
  r.contrast_se = std::sqrt((x * x * vx + y * y * vy) / c2);
  return r;
}

ThermometryResult run_thermometry_probe(double attempt_fraction, double total_time, const AttemptLoopConfig& loop,
                                        double n_bar_base, int shots, std::uint64_t seed, double sideband_scale) {
  loop.validate();
  if (!(attempt_fraction >= 0.0 && attempt_fraction <= 1.0)) throw PhysicsError("attempt_fraction must lie in [0, 1]");
  if (!(total_time > 0.0)) throw PhysicsError("total_time must be positive");
  if (!(n_bar_base >= 0.0)) throw PhysicsError("n_bar_base must be non-negative");
  if (!(sideband_scale > 0.0 && sideband_scale <= 1.0)) throw PhysicsError("sideband_scale must lie in (0, 1]");
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  ThermometryResult r;
  r.attempts = std::llround(attempt_fraction * total_time / loop.attempt_period);
  r.n_bar_true = n_bar_base + static_cast<double>(r.attempts) * loop.heating_per_attempt;
  const double ratio = r.n_bar_true / (1.0 + r.n_bar_true);
  const double pb = sideband_scale, pr = sideband_scale * ratio;

  rng::Philox gen(seed, 0, 1);
  const double kb = static_cast<double>(rng::binomial(shots, pb, gen));
  const double kr = static_cast<double>(rng::binomial(shots, pr, gen));
  if (kb <= 0.0) throw PhysicsError("thermometry: no blue-sideband excitations recorded");
  const double rh = std::min(kr / kb, 1.0 - 1e-9);
  r.n_bar = rh / (1.0 - rh);
  const double n = static_cast<double>(shots);
  const double fb = kb / n, fr = std::max(kr, 1.0) / n;
  const double rel2 = (1.0 - fr) / (n * fr) + (1.0 - fb) / (n * fb);
  const double se_r = std::max(rh, 1.0 / kb) * std::sqrt(rel2);
  r.n_bar_se = se_r / ((1.0 - rh) * (1.0 - rh));
  return r;
}

double rate_ratio(double decoherence_rate, double entanglement_rate) {
  if (!(decoherence_rate > 0.0) || !(entanglement_rate > 0.0)) throw PhysicsError("rate_ratio: rates must be positive");
  return decoherence_rate / entanglement_rate;
}

}  // namespace qnode::protocol
