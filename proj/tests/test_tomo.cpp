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

#include "qnode/dynamics.hpp"
#include "qnode/fidelity.hpp"
#include "qnode/tomo.hpp"

#include <doctest.h>

#include <limits>

using namespace qnode;
using namespace qnode::testing;

namespace {

// (|down, H> + |up, V>)/sqrt(2), ion (x) photon.
DensityMatrix ion_photon_bell() {
  const double s = 1.0 / std::sqrt(2.0);
  return DensityMatrix::pure(ket({0.0, s, s, 0.0}));
}

double nll(const DensityMatrix& rho, const tomo::ClickDataset& data, int h, const bsa::OpticsConfig& optics) {
  const tomo::MeasurementModel m = tomo::measurement_model(data, optics);
  return tomo::neg_log_likelihood(rho, data, h, m.povms, m.ion_projs);
}

ComplexMatrix iswap() { return dynamics::iswap_unitary(); }

ComplexMatrix fully_depolarizing_choi() { return qlin::identity(16) / 16.0; }

}  // namespace

TEST_CASE("dataset invariants") {
  tomo::ClickDataset d = tomo::empty_dataset();
  CHECK(d.settings.size() == 24);
  CHECK_NOTHROW(d.validate());
  d.settings[3].attempts = 5;
  d.settings[3].n_empty = 1;
  d.settings[3].clicks[2] = 4;
  d.settings[3].ion[2] = {3, 1};
  CHECK_NOTHROW(d.validate());
  tomo::ClickDataset bad = d;
  bad.settings[3].ion[2] = {3, 2};
  CHECK_THROWS_AS(bad.validate(), tomo::DataError);
  bad = d;
  bad.settings[3].attempts = 6;
  CHECK_THROWS_AS(bad.validate(), tomo::DataError);
  bad = d;
  bad.settings[3].n_empty = -1;
  bad.settings[3].attempts = 3;
  CHECK_THROWS_AS(bad.validate(), tomo::DataError);
  CHECK_THROWS_AS(tomo::mle_state(tomo::empty_dataset(), 0, bsa::OpticsConfig::ideal()), tomo::DataError);
}

TEST_CASE("likelihood") {
  const bsa::OpticsConfig ideal = bsa::OpticsConfig::ideal();
  // Counts in a single setting.
  tomo::ClickDataset one = tomo::empty_dataset();
  one.settings[0].attempts = 10;
  one.settings[0].clicks = {3, 2, 4, 1};
  one.settings[0].ion = {{{2, 1}, {1, 1}, {2, 2}, {0, 1}}};
  const double v = nll(DensityMatrix::maximally_mixed(4), one, 0, ideal);
  CHECK(std::isfinite(v));

  // Linear in the counts.
  const tomo::ClickDataset data = tomo::simulate_dataset(ion_photon_bell(), bsa::OpticsConfig::measured(), 200, 31);
  tomo::ClickDataset twice = data;
  for (auto& s : twice.settings) {
    s.attempts *= 2;
    s.n_empty *= 2;
    for (auto& c : s.clicks) c *= 2;
    for (auto& io : s.ion)
      for (auto& c : io) c *= 2;
  }
  std::mt19937_64 rng(32);
  const DensityMatrix rho(random_density(4, rng));
  const bsa::OpticsConfig s1 = bsa::OpticsConfig::measured();
  for (int h = 0; h < 4; ++h) CHECK(nll(rho, twice, h, s1) == doctest::Approx(2.0 * nll(rho, data, h, s1)).epsilon(1e-14));

  // An observed outcome with zero probability: +inf, not an exception.
  tomo::ClickDataset zero = tomo::empty_dataset();
  zero.settings[4].attempts = 1;  // z ion basis, H/V photon basis
  zero.settings[4].clicks[0] = 1;
  zero.settings[4].ion[0] = {1, 0};
  const DensityMatrix down_h = DensityMatrix::pure(ket({0.0, 0.0, 1.0, 0.0}));
  CHECK(nll(down_h, zero, 0, ideal) == std::numeric_limits<double>::infinity());
}

TEST_CASE("likelihood is minimized near the generating state") {
  std::mt19937_64 rng(33);
  const DensityMatrix truth(random_density(4, rng));
  const bsa::OpticsConfig s1 = bsa::OpticsConfig::measured();
  const tomo::ClickDataset data = tomo::simulate_dataset(truth, s1, 100000, 34);
  const double at_truth = nll(truth, data, 1, s1);
  int worse = 0;
  for (int i = 0; i < 100; ++i) {
    const ComplexMatrix pert = random_density(4, rng);
    const DensityMatrix rho = DensityMatrix::project(0.95 * truth.matrix() + 0.05 * pert);
    worse += nll(rho, data, 1, s1) >= at_truth;
  }
  CHECK(worse == 100);
  const tomo::StateEstimate est = tomo::mle_state(data, 1, s1);
  CHECK(est.converged);
  CHECK(nll(est.rho, data, 1, s1) <= at_truth + 1e-9);
}

TEST_CASE("state tomography closure") {
  const bsa::OpticsConfig ideal = bsa::OpticsConfig::ideal();
  const DensityMatrix bell = ion_photon_bell();

  // The experiment's sample size.
  const tomo::ClickDataset small = tomo::simulate_dataset(bell, ideal, 500, 41);
  double sum = 0.0;
  for (int h = 0; h < 4; ++h) {
    const tomo::StateEstimate est = tomo::mle_state(small, h, ideal);
    CHECK(est.converged);
    CHECK(nll(est.rho, small, h, ideal) <= nll(bell, small, h, ideal) + 1e-9);
    sum += fidelity::entangled_fraction_fidelity(est.rho);
  }
  CHECK(sum / 4.0 >= 0.98);

  const tomo::ClickDataset mixed = tomo::simulate_dataset(DensityMatrix::maximally_mixed(4), ideal, 100000, 42);
  CHECK(qlin::trace_distance(tomo::mle_state(mixed, 0, ideal).rho.matrix(), qlin::identity(4) / 4.0) <= 0.01);

  // A pure state is pinned by positivity, so all four detectors agree.
  const tomo::ClickDataset big = tomo::simulate_dataset(bell, ideal, 1000000, 44);
  std::vector<ComplexMatrix> per;
  for (int h = 0; h < 4; ++h) {
    per.push_back(tomo::mle_state(big, h, ideal).rho.matrix());
    CHECK(qlin::trace_distance(per.back(), bell.matrix()) <= 3e-3);
  }
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) CHECK(qlin::trace_distance(per[a], per[b]) < 0.01);
}

namespace {

// All detectors' ion-correlated counts in one likelihood.
tomo::LikelihoodModel pooled_likelihood(const tomo::ClickDataset& data, const bsa::OpticsConfig& optics) {
  const tomo::MeasurementModel m = tomo::measurement_model(data, optics);
  tomo::LikelihoodModel lm(4);
  for (std::size_t i = 0; i < data.settings.size(); ++i) {
    const tomo::SettingCounts& c = data.settings[i];
    lm.add_term(qlin::kron(qlin::identity(2), m.povms[i].empty), static_cast<double>(c.n_empty));
    for (int h = 0; h < 4; ++h)
      for (int o = 0; o < 2; ++o)
        lm.add_term(qlin::kron(m.ion_projs[i][o], m.povms[i].click[h]), static_cast<double>(c.ion[h][o]));
  }
  return lm;
}

}  // namespace

TEST_CASE("single-detector likelihood has a blind direction") {
  // Both circular settings give a detector the same handedness, so with
  // ideal waveplates each detector sees only three photon projectors.
  const bsa::OpticsConfig ideal = bsa::OpticsConfig::ideal();
  const tomo::MeasurementModel m = tomo::measurement_model(tomo::empty_dataset(), ideal);
  for (int h = 0; h < 4; ++h) {
    Eigen::MatrixXcd a(4, 4);
    for (int p = 0; p < 4; ++p) a.row(p) = qlin::vec(m.povms[6 * p].click[h]).adjoint();
    CHECK(Eigen::FullPivLU<Eigen::MatrixXcd>(a).rank() == 3);
  }

  Eigen::MatrixXcd a(4, 4);
  for (int p = 0; p < 4; ++p) a.row(p) = qlin::vec(m.povms[6 * p].click[0]).adjoint();
  const ComplexMatrix k = qlin::unvec(Eigen::FullPivLU<Eigen::MatrixXcd>(a).kernel().col(0), 2, 2);
  ComplexMatrix blind = k + k.adjoint();
  if (blind.norm() < 1e-6) blind = cplx(0.0, 1.0) * (k - k.adjoint());
  blind /= blind.norm();

  // Moving along blind (x) sigma leaves detector 0's likelihood unchanged.
  const ComplexVector psi = ket({0.0, 1.0, 1.0, 0.0}) / std::sqrt(2.0);
  const ComplexMatrix werner = 0.8 * psi * psi.adjoint() + 0.05 * qlin::identity(4);
  const tomo::ClickDataset data = tomo::simulate_dataset(DensityMatrix::project(werner), ideal, 1000, 45);
  const tomo::LikelihoodModel lm = tomo::state_likelihood(data, 0, tomo::measurement_model(data, ideal));
  const double base = lm.value(werner);
  for (int j = 1; j <= 3; ++j) {
    const ComplexMatrix shifted = werner + 0.02 * qlin::kron(qlin::pauli(j), blind);
    REQUIRE(qlin::herm_eig(shifted).values(0) > 0.0);
    CHECK(lm.value(shifted) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("likelihood is consistent when the data are complete") {
  // Pooling the ion-correlated counts of all detectors is informationally
  // complete, and the same machinery then recovers any state.
  const bsa::OpticsConfig ideal = bsa::OpticsConfig::ideal(), s1 = bsa::OpticsConfig::measured();
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix truth(random_density(4, rng));
    const bsa::OpticsConfig& optics = trial % 2 ? s1 : ideal;
    const tomo::ClickDataset big = tomo::simulate_dataset(truth, optics, 1000000, 100 + trial);
    const tomo::MleFit fit = tomo::mle_fit(pooled_likelihood(big, optics));
    CHECK(qlin::trace_distance(fit.rho, truth.matrix()) <= 3e-3);

    // The single-detector estimate reproduces every outcome probability it
    // is fitted to, whatever it does along the blind direction.
    const int h = trial % 4;
    const tomo::StateEstimate est = tomo::mle_state(big, h, optics);
    CHECK(est.converged);
    const tomo::MeasurementModel m = tomo::measurement_model(big, optics);
    double worst = 0.0;
    for (std::size_t i = 0; i < m.povms.size(); ++i)
      for (int o = 0; o < 2; ++o) {
        const ComplexMatrix e = qlin::kron(m.ion_projs[i][o], m.povms[i].click[h]);
        worst = std::max(worst, std::abs((e * (est.rho.matrix() - truth.matrix())).trace().real()));
      }
    CHECK(worst <= 2e-3);
  }
}

TEST_CASE("channels") {
  std::mt19937_64 rng(51);
  const ComplexMatrix u = random_unitary(4, rng);
  const ComplexMatrix x = random_density(4, rng);
  const tomo::ChoiMatrix cu = tomo::choi_from_unitary(u);
  CHECK(cu.trace().real() == doctest::Approx(1.0));
  CHECK((tomo::apply_channel(cu, x) - u * x * u.adjoint()).norm() < 1e-12);
  CHECK((tomo::choi_from_superop(tomo::superop_from_choi(cu)) - cu).norm() < 1e-14);
  // Superoperator acts on column-stacked vectors.
  CHECK((tomo::superop_from_choi(cu) * qlin::vec(x) - qlin::vec(u * x * u.adjoint())).norm() < 1e-12);

  const ComplexMatrix v = random_unitary(4, rng);
  CHECK((tomo::compose(tomo::choi_from_unitary(v), cu) - tomo::choi_from_unitary(v * u)).norm() < 1e-12);
  CHECK((tomo::apply_channel(tomo::depolarize(cu, 0.3), x) -
         (0.7 * u * x * u.adjoint() + 0.3 * qlin::identity(4) / 4.0))
            .norm() < 1e-12);

  const ComplexMatrix a = random_unitary(2, rng), b = random_unitary(2, rng);
  CHECK((tomo::tensor_channels(tomo::choi_from_unitary(a), tomo::choi_from_unitary(b)) -
         tomo::choi_from_unitary(qlin::kron(a, b)))
            .norm() < 1e-12);

  CHECK(tomo::check_choi(cu) < 1e-12);
  ComplexMatrix broken = cu;
  broken(0, 0) += 0.5;
  CHECK_THROWS_AS(tomo::check_choi(broken), PhysicsError);
}

TEST_CASE("process fidelity") {
  const tomo::ChoiMatrix id = tomo::choi_identity(4);
  const tomo::ChoiMatrix is = tomo::choi_from_unitary(iswap());
  CHECK(tomo::process_fidelity(is, is) == doctest::Approx(1.0));
  // |Tr(iSWAP)|^2 / 16 = |2|^2 / 16.
  CHECK(tomo::process_fidelity(is, id) == doctest::Approx(0.25));
  CHECK(tomo::process_fidelity(fully_depolarizing_choi(), is) == doctest::Approx(1.0 / 16.0));

  std::mt19937_64 rng(52);
  const ComplexMatrix noisy = tomo::depolarize(tomo::choi_from_unitary(random_unitary(4, rng)), 0.2);
  CHECK(tomo::process_fidelity(noisy, is) == doctest::Approx(tomo::process_fidelity(is, noisy)));
  const ComplexMatrix w = random_unitary(16, rng);
  CHECK(tomo::process_fidelity(w * noisy * w.adjoint(), w * is * w.adjoint()) ==
        doctest::Approx(tomo::process_fidelity(noisy, is)).epsilon(1e-12));
}

TEST_CASE("process tomography") {
  const auto preps = tomo::process_preparations();
  REQUIRE(preps.size() == 16);
  const tomo::ChoiMatrix is = tomo::choi_from_unitary(iswap());

  auto outputs = [&](const tomo::ChoiMatrix& chi) {
    std::vector<DensityMatrix> out;
    for (const auto& p : preps) out.push_back(DensityMatrix::project(tomo::apply_channel(chi, p)));
    return out;
  };

  const tomo::ProcessEstimate ideal = tomo::process_tomography(preps, outputs(is));
  CHECK(ideal.converged);
  CHECK(tomo::process_fidelity(ideal.chi, is) >= 0.999);
  CHECK(tomo::check_choi(ideal.chi) < 1e-3);

  const tomo::ChoiMatrix id = tomo::choi_identity(4);
  CHECK(qlin::trace_distance(tomo::process_tomography(preps, outputs(id)).chi, id) <= 1e-3 * 16);

  // Depolarizing with p = 0.05: overlap of the maximally mixed Choi matrix with a pure one is 1/16.
  const tomo::ProcessEstimate dep = tomo::process_tomography(preps, outputs(tomo::depolarize(is, 0.05)));
  CHECK(std::abs(tomo::process_fidelity(dep.chi, is) - (0.95 + 0.05 / 16.0)) < 0.01);

  // From sampled counts.
  const tomo::ProcessData counts = tomo::simulate_process_data(is, 20000, 53);
  const tomo::ProcessEstimate sampled = tomo::process_tomography(counts);
  CHECK(tomo::process_fidelity(sampled.chi, is) >= 0.995);
  CHECK(sampled.chi.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(qlin::herm_eig(sampled.chi).values(0) >= -1e-9);

  std::vector<ComplexMatrix> degenerate(16, preps[0]);
  std::vector<DensityMatrix> outs(16, DensityMatrix::project(preps[0]));
  CHECK_THROWS_AS(tomo::process_tomography(degenerate, outs), PhysicsError);
}

TEST_CASE("conditional subspace fidelity") {
  const tomo::ChoiMatrix is = tomo::choi_from_unitary(iswap());
  CHECK(tomo::conditional_subspace_fidelity(is) == doctest::Approx(1.0));
  CHECK(tomo::conditional_subspace_fidelity(tomo::choi_identity(4)) == doctest::Approx(0.5));

  // Phase flip with probability q on the logic qubit after the iSWAP.
  const ComplexMatrix zl = qlin::kron(qlin::identity(2), qlin::pauli_z());
  for (double q : {0.01, 0.05, 0.1}) {
    const tomo::ChoiMatrix flipped = (1.0 - q) * is + q * tomo::choi_from_unitary(zl * iswap());
    // The conditional map becomes (1-q) U + q Z U on one qubit: fidelity 1 - q.
    CHECK(tomo::conditional_subspace_fidelity(flipped) == doctest::Approx(1.0 - q).epsilon(1e-12));
  }
  // Replacement channel onto network |up>: nothing survives the postselection.
  const ComplexMatrix up_down = qlin::kron(qlin::projector(ket({1.0, 0.0})), qlin::projector(ket({0.0, 1.0})));
  CHECK_THROWS_AS(tomo::conditional_subspace_fidelity(qlin::kron(qlin::identity(4) / 4.0, up_down)), PhysicsError);
}
