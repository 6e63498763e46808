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

#include "qnode/tomo.hpp"

#include "qnode/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace qnode::tomo {
namespace {

constexpr double kProbFloor = 1e-300;

double trace_product(const ComplexMatrix& effect_t, const ComplexMatrix& rho) {
  return effect_t.cwiseProduct(rho).sum().real();
}

std::string where(std::size_t i) { return "setting " + std::to_string(i) + ": "; }

}  // namespace

void ClickDataset::validate() const {
  if (settings.size() != static_cast<std::size_t>(bsa::kTomographySettings))
    throw DataError("dataset must contain " + std::to_string(bsa::kTomographySettings) + " settings, found " +
                    std::to_string(settings.size()));
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const SettingCounts& s = settings[i];
    if (s.attempts < 0 || s.n_empty < 0) throw DataError(where(i) + "negative count");
    long long sum = s.n_empty;
    for (int h = 0; h < bsa::kDetectors; ++h) {
      if (s.clicks[h] < 0 || s.ion[h][0] < 0 || s.ion[h][1] < 0) throw DataError(where(i) + "negative count");
      if (s.ion[h][0] + s.ion[h][1] != s.clicks[h])
        throw DataError(where(i) + "ion outcomes on detector " + std::to_string(h) + " do not add up to its clicks");
      sum += s.clicks[h];
    }
    if (sum != s.attempts) throw DataError(where(i) + "clicks + empties != attempts");
  }
}

long long ClickDataset::detector_clicks(int h) const {
  long long n = 0;
  for (const auto& s : settings) n += s.clicks.at(h);
  return n;
}

long long ClickDataset::total_attempts() const {
  long long n = 0;
  for (const auto& s : settings) n += s.attempts;
  return n;
}

ClickDataset empty_dataset() {
  ClickDataset d;
  for (const auto& st : bsa::tomography_settings()) d.settings.push_back(SettingCounts{st});
  return d;
}

OutcomeProbabilities outcome_probabilities(const DensityMatrix& rho_ip, const bsa::PhotonPOVM& povm,
                                           const std::array<ComplexMatrix, 2>& xi) {
  const ComplexMatrix& rho = rho_ip.matrix();
  const ComplexMatrix id = qlin::identity(2);
  OutcomeProbabilities p;
  p.empty = (qlin::kron(id, povm.empty) * rho).trace().real();
  for (int h = 0; h < bsa::kDetectors; ++h) {
    p.click[h] = (qlin::kron(id, povm.click[h]) * rho).trace().real();
    for (int o = 0; o < 2; ++o) p.joint[h][o] = (qlin::kron(xi[o], povm.click[h]) * rho).trace().real();
  }
  return p;
}

ClickDataset simulate_dataset(const DensityMatrix& rho_ip, const bsa::OpticsConfig& optics, long long photons,
                              std::uint64_t seed) {
  ClickDataset data = empty_dataset();
  data.seed = seed;
  for (std::size_t i = 0; i < data.settings.size(); ++i) {
    SettingCounts& s = data.settings[i];
    const bsa::PhotonPOVM povm = bsa::build_povm(optics, s.setting.photon);
    const std::array<ComplexMatrix, 2> xi{bsa::ion_projector(s.setting.ion, bsa::IonOutcome::bright),
                                          bsa::ion_projector(s.setting.ion, bsa::IonOutcome::dark)};
    const OutcomeProbabilities p = outcome_probabilities(rho_ip, povm, xi);
    rng::Philox gen(seed, static_cast<std::uint32_t>(i), 0);
    const std::array<double, 5> probs{p.empty, p.click[0], p.click[1], p.click[2], p.click[3]};
    std::array<long long, 5> n{};
    rng::multinomial(photons, probs, n, gen);
    s.attempts = photons;
    s.n_empty = n[0];
    for (int h = 0; h < bsa::kDetectors; ++h) {
      s.clicks[h] = n[h + 1];
      const double pb = p.click[h] > 0.0 ? p.joint[h][0] / p.click[h] : 0.5;
      s.ion[h][0] = rng::binomial(s.clicks[h], pb, gen);
      s.ion[h][1] = s.clicks[h] - s.ion[h][0];
    }
  }
  return data;
}

void LikelihoodModel::add_term(const ComplexMatrix& effect, double count) {
  if (count < 0.0) throw DataError("negative count in likelihood");
  if (count == 0.0) return;
  terms_.push_back({effect.transpose(), effect, count});
  total_ += count;
}

void LikelihoodModel::add_group(const ComplexMatrix& effect_sum, double count) {
  if (count == 0.0) return;
  groups_.push_back({effect_sum.transpose(), effect_sum, count});
}

double LikelihoodModel::value(const ComplexMatrix& rho) const {
  double nll = 0.0;
  for (const Term& t : terms_) {
    const double p = trace_product(t.effect_t, rho);
    if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
    nll -= t.count * std::log(std::max(p, kProbFloor));
  }
  for (const Term& g : groups_) nll += g.count * trace_product(g.effect_t, rho);
  return nll;
}

double LikelihoodModel::value_and_gradient(const ComplexMatrix& rho, ComplexMatrix& r) const {
  r = ComplexMatrix::Zero(dim_, dim_);
  double nll = 0.0;
  for (const Term& t : terms_) {
    const double p = trace_product(t.effect_t, rho);
    if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
    const double pf = std::max(p, kProbFloor);
    nll -= t.count * std::log(pf);
    r -= (t.count / pf) * t.effect;
  }
  for (const Term& g : groups_) {
    nll += g.count * trace_product(g.effect_t, rho);
    r += g.count * g.effect;
  }
  return nll;
}

MeasurementModel measurement_model(const ClickDataset& data, const bsa::OpticsConfig& optics) {
  MeasurementModel m;
  for (const auto& s : data.settings) {
    m.povms.push_back(bsa::build_povm(optics, s.setting.photon));
    m.ion_projs.push_back({bsa::ion_projector(s.setting.ion, bsa::IonOutcome::bright),
                           bsa::ion_projector(s.setting.ion, bsa::IonOutcome::dark)});
  }
  return m;
}

LikelihoodModel state_likelihood(const ClickDataset& data, int detector, const MeasurementModel& model) {
  if (detector < 0 || detector >= bsa::kDetectors) throw std::out_of_range("detector index must be 0..3");
  if (model.povms.size() != data.settings.size() || model.ion_projs.size() != data.settings.size())
    throw std::invalid_argument("measurement model does not match the dataset");
  const ComplexMatrix id = qlin::identity(2);
  LikelihoodModel lm(4);
  for (std::size_t i = 0; i < data.settings.size(); ++i) {
    const SettingCounts& s = data.settings[i];
    const bsa::PhotonPOVM& povm = model.povms[i];
    lm.add_term(qlin::kron(id, povm.empty), static_cast<double>(s.n_empty));
    for (int k = 0; k < bsa::kDetectors; ++k) {
      if (k == detector) continue;
      lm.add_term(qlin::kron(id, povm.click[k]), static_cast<double>(s.clicks[k]));
    }
    for (int o = 0; o < 2; ++o)
      lm.add_term(qlin::kron(model.ion_projs[i][o], povm.click[detector]), static_cast<double>(s.ion[detector][o]));
  }
  return lm;
}

double neg_log_likelihood(const DensityMatrix& rho, const ClickDataset& data, int detector,
                          const std::vector<bsa::PhotonPOVM>& povms,
                          const std::vector<std::array<ComplexMatrix, 2>>& ion_projs) {
  data.validate();
  if (rho.dim() != 4) throw PhysicsError("neg_log_likelihood: expected an ion-photon state");
  return state_likelihood(data, detector, MeasurementModel{povms, ion_projs}).value(rho.matrix());
}

namespace {

ComplexMatrix unpack_g(const Eigen::VectorXd& x, int d) {
  ComplexMatrix g = ComplexMatrix::Zero(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i) g(i, i) = x(k++);
  for (int i = 1; i < d; ++i)
    for (int j = 0; j < i; ++j) {
      g(i, j) = cplx(x(k), x(k + 1));
      k += 2;
    }
  return g;
}

ComplexMatrix rho_from_g(const ComplexMatrix& g) {
  const ComplexMatrix gg = g * g.adjoint();
  return gg / gg.trace().real();
}

}  // namespace

MleFit mle_fit(const LikelihoodModel& model, const lbfgs::Options& opts) {
  const int d = model.dim();
  const double scale = model.total_count();
  if (!(scale > 0.0)) throw DataError("likelihood has no counts");

  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const ComplexMatrix g = unpack_g(x, d);
    const ComplexMatrix gg = g * g.adjoint();
    const double t = gg.trace().real();
    grad.setZero(x.size());
    if (!(t > 0.0)) return std::numeric_limits<double>::infinity();
    const ComplexMatrix rho = gg / t;
    ComplexMatrix r;
    const double f = model.value_and_gradient(rho, r) / scale;
    if (!std::isfinite(f)) return f;
    r /= scale;
    // dNLL = Tr(R drho); with rho = GG^+/t this gives dNLL = 2 Re Tr(G^+ M dG).
    const ComplexMatrix m = (r - (r * rho).trace().real() * qlin::identity(d)) / t;
    const ComplexMatrix mg = 2.0 * m * g;
    int k = 0;
    for (int i = 0; i < d; ++i) grad(k++) = mg(i, i).real();
    for (int i = 1; i < d; ++i)
      for (int j = 0; j < i; ++j) {
        grad(k) = mg(i, j).real();
        grad(k + 1) = mg(i, j).imag();
        k += 2;
      }
    return f;
  };

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(d * d);
  x0.head(d).setOnes();
  const lbfgs::Result res = lbfgs::minimize(objective, x0, opts);
  MleFit fit;
  fit.rho = rho_from_g(unpack_g(res.x, d));
  fit.rho = 0.5 * (fit.rho + fit.rho.adjoint());
  fit.nll = res.f * scale;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  return fit;
}

StateEstimate mle_state(const ClickDataset& data, int detector, const bsa::OpticsConfig& optics) {
  data.validate();
  if (data.detector_clicks(detector) < 1)
    throw DataError("detector " + std::to_string(detector) + " has no clicks");
  const LikelihoodModel lm = state_likelihood(data, detector, measurement_model(data, optics));
  const MleFit fit = mle_fit(lm);
  return {DensityMatrix::project(fit.rho), fit.nll, fit.iterations, fit.converged};
}

// ---- channels ----

ChoiMatrix choi_from_unitary(const ComplexMatrix& u) {
  const int d = static_cast<int>(u.rows());
  ComplexVector phi = ComplexVector::Zero(d * d);
  for (int i = 0; i < d; ++i) phi.segment(i * d, d) = u.col(i);
  return phi * phi.adjoint() / static_cast<double>(d);
}

ChoiMatrix choi_identity(int dim) { return choi_from_unitary(qlin::identity(dim)); }

ComplexMatrix superop_from_choi(const ChoiMatrix& chi) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(chi.rows()))));
  ComplexMatrix s(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) s(b * d + a, j * d + i) = static_cast<double>(d) * chi(i * d + a, j * d + b);
  return s;
}

ChoiMatrix choi_from_superop(const ComplexMatrix& s) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.rows()))));
  ChoiMatrix chi(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) chi(i * d + a, j * d + b) = s(b * d + a, j * d + i) / static_cast<double>(d);
  return chi;
}

ComplexMatrix apply_channel(const ChoiMatrix& chi, const ComplexMatrix& x) {
  const int d = static_cast<int>(x.rows());
  if (chi.rows() != d * d) throw std::invalid_argument("apply_channel: dimension mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (x(i, j) != cplx(0.0)) out += x(i, j) * chi.block(i * d, j * d, d, d);
  return static_cast<double>(d) * out;
}

ChoiMatrix compose(const ChoiMatrix& second, const ChoiMatrix& first) {
  if (second.rows() != first.rows()) throw std::invalid_argument("compose: dimension mismatch");
  return choi_from_superop(superop_from_choi(second) * superop_from_choi(first));
}

ChoiMatrix depolarize(const ChoiMatrix& chi, double p) {
  const auto n = chi.rows();
  return (1.0 - p) * chi + p * qlin::identity(static_cast<int>(n)) / static_cast<double>(n);
}

ChoiMatrix tensor_channels(const ChoiMatrix& a, const ChoiMatrix& b) {
  const int da = static_cast<int>(std::lround(std::sqrt(static_cast<double>(a.rows()))));
  const int db = static_cast<int>(std::lround(std::sqrt(static_cast<double>(b.rows()))));
  const int d = da * db;
  // Reorder kron(a, b), which is (in_a, out_a, in_b, out_b), into (in_a, in_b, out_a, out_b).
  const ComplexMatrix k = qlin::kron(a, b);
  auto idx = [&](int ia, int ib, int oa, int ob) { return ((ia * da + oa) * db + ib) * db + ob; };
  ChoiMatrix chi(d * d, d * d);
  for (int ia = 0; ia < da; ++ia)
    for (int ib = 0; ib < db; ++ib)
      for (int oa = 0; oa < da; ++oa)
        for (int ob = 0; ob < db; ++ob)
          for (int ja = 0; ja < da; ++ja)
            for (int jb = 0; jb < db; ++jb)
              for (int pa = 0; pa < da; ++pa)
                for (int pb = 0; pb < db; ++pb)
                  chi((ia * db + ib) * d + oa * db + ob, (ja * db + jb) * d + pa * db + pb) =
                      k(idx(ia, ib, oa, ob), idx(ja, jb, pa, pb));
  return chi;
}

double check_choi(const ChoiMatrix& chi) {
  if (!qlin::is_hermitian(chi, 1e-9)) throw PhysicsError("Choi matrix is not Hermitian");
  if (std::abs(chi.trace() - 1.0) > 1e-9) throw PhysicsError("Choi matrix trace is not 1");
  if (qlin::herm_eig(chi).values(0) < -1e-9) throw PhysicsError("Choi matrix is not positive");
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(chi.rows()))));
  const int dims[2] = {d, d};
  const ComplexMatrix in = qlin::partial_trace(chi, dims, 0);
  return (in - qlin::identity(d) / static_cast<double>(d)).norm();
}

std::vector<ComplexMatrix> process_preparations() {
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<ComplexVector> kets(4, ComplexVector::Zero(2));
  kets[0](0) = 1.0;
  kets[1](1) = 1.0;
  kets[2] << r, r;
  kets[3] << r, cplx(0.0, r);
  std::vector<ComplexMatrix> out;
  for (const auto& a : kets)
    for (const auto& b : kets) out.push_back(qlin::kron(qlin::projector(a), qlin::projector(b)));
  return out;
}

std::vector<std::array<ComplexMatrix, 4>> process_measurements() {
  // Eigenprojectors (+1, -1) of X, Y, Z.
  std::array<std::array<ComplexMatrix, 2>, 3> single;
  for (int p = 0; p < 3; ++p) {
    const ComplexMatrix s = qlin::pauli(p + 1);
    single[p] = {(qlin::identity(2) + s) / 2.0, (qlin::identity(2) - s) / 2.0};
  }
  std::vector<std::array<ComplexMatrix, 4>> out;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q)
      out.push_back({qlin::kron(single[p][0], single[q][0]), qlin::kron(single[p][0], single[q][1]),
                     qlin::kron(single[p][1], single[q][0]), qlin::kron(single[p][1], single[q][1])});
  return out;
}

ProcessEstimate process_tomography(const ProcessData& data, const lbfgs::Options& opts) {
  const std::size_t n_prep = data.preparations.size();
  if (n_prep == 0 || data.counts.size() != n_prep)
    throw DataError("process data: counts must be given for every preparation");
  const int d = static_cast<int>(data.preparations.front().rows());
  ComplexMatrix span(d * d, static_cast<Eigen::Index>(n_prep));
  for (std::size_t k = 0; k < n_prep; ++k) span.col(static_cast<Eigen::Index>(k)) = qlin::vec(data.preparations[k]);
  Eigen::JacobiSVD<ComplexMatrix> svd(span);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv.size() < d * d || sv(d * d - 1) < 1e-9 * sv(0))
    throw PhysicsError("process tomography: preparation set is rank deficient");

  const auto bases = process_measurements();
  if (d != 4) throw PhysicsError("process tomography: two-qubit preparations expected");
  LikelihoodModel lm(d * d);
  for (std::size_t k = 0; k < n_prep; ++k) {
    const ComplexMatrix rt = data.preparations[k].transpose();
    for (std::size_t b = 0; b < bases.size(); ++b) {
      ComplexMatrix sum = ComplexMatrix::Zero(d * d, d * d);
      double n_group = 0.0;
      for (int o = 0; o < 4; ++o) {
        const ComplexMatrix e = static_cast<double>(d) * qlin::kron(rt, bases[b][o]);
        lm.add_term(e, data.counts[k][b][o]);
        sum += e;
        n_group += data.counts[k][b][o];
      }
      lm.add_group(sum, n_group);
    }
  }
  const MleFit fit = mle_fit(lm, opts);
  ProcessEstimate est;
  est.chi = fit.rho;
  est.nll = fit.nll;
  est.iterations = fit.iterations;
  est.converged = fit.converged;
  est.tp_residual = check_choi(est.chi);
  return est;
}

ProcessEstimate process_tomography(const std::vector<ComplexMatrix>& inputs, const std::vector<DensityMatrix>& outputs,
                                   double shots, const lbfgs::Options& opts) {
  if (inputs.size() != outputs.size()) throw DataError("process tomography: one output per input required");
  const auto bases = process_measurements();
  ProcessData data{inputs, {}};
  for (const DensityMatrix& out : outputs) {
    std::array<std::array<double, 4>, 9> c{};
    for (std::size_t b = 0; b < bases.size(); ++b)
      for (int o = 0; o < 4; ++o) c[b][o] = shots * std::max(0.0, (bases[b][o] * out.matrix()).trace().real());
    data.counts.push_back(c);
  }
  return process_tomography(data, opts);
}

ProcessData simulate_process_data(const ChoiMatrix& chi, long long shots, std::uint64_t seed) {
  const auto preps = process_preparations();
  const auto bases = process_measurements();
  ProcessData data{preps, {}};
  for (std::size_t k = 0; k < preps.size(); ++k) {
    const ComplexMatrix out = apply_channel(chi, preps[k]);
    std::array<std::array<double, 4>, 9> c{};
    for (std::size_t b = 0; b < bases.size(); ++b) {
      rng::Philox gen(seed, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(b));
      std::array<double, 4> p{};
      for (int o = 0; o < 4; ++o) p[o] = (bases[b][o] * out).trace().real();
      std::array<long long, 4> n{};
      rng::multinomial(shots, p, n, gen);
      for (int o = 0; o < 4; ++o) c[b][o] = static_cast<double>(n[o]);
    }
    data.counts.push_back(c);
  }
  return data;
}

double process_fidelity(const ChoiMatrix& chi_exp, const ChoiMatrix& chi_id) {
  if (chi_exp.rows() != chi_id.rows()) throw std::invalid_argument("process_fidelity: dimension mismatch");
  return (chi_id * chi_exp).trace().real();
}

double conditional_subspace_fidelity(const ChoiMatrix& chi_exp) {
  if (chi_exp.rows() != 16) throw PhysicsError("conditional_subspace_fidelity: two-qubit Choi matrix expected");
  ComplexMatrix down = ComplexMatrix::Zero(2, 2);
  down(1, 1) = 1.0;
  ChoiMatrix cond = ComplexMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      ComplexMatrix e = ComplexMatrix::Zero(2, 2);
      e(a, b) = 1.0;
      const ComplexMatrix out = apply_channel(chi_exp, qlin::kron(e, down));
      cond.block(2 * a, 2 * b, 2, 2) = out.block(2, 2, 2, 2);
    }
  const double norm = cond.trace().real();
  if (!(norm > 1e-12)) throw PhysicsError("conditional_subspace_fidelity: postselection probability is zero");
  cond /= norm;
  ComplexMatrix uc = ComplexMatrix::Zero(2, 2);
  uc(0, 0) = cplx(0.0, 1.0);
  uc(1, 1) = 1.0;
  return process_fidelity(cond, choi_from_unitary(uc));
}

}  // namespace qnode::tomo
