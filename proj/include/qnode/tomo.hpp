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

// tomo.hpp: maximum-likelihood state tomography of the ion-photon pair and
// Choi-matrix process tomography of two-qubit channels.
//
// Choi convention used throughout: for a channel E on a d-dimensional
// system, chi = (1/d) sum_ij |i><j| (x) E(|i><j|), input factor first,
// normalized to trace one. Its action is E(X) = d Tr_in[(X^T (x) 1) chi] and
// vec(.) is column stacking. With this normalization the process fidelity of
// a channel with a unitary target is Tr(chi_id chi_exp).

#pragma once

#include "qnode/bsa.hpp"
#include "qnode/lbfgs.hpp"
#include "qnode/qlin.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qnode::tomo {

/// Invalid or inconsistent input data (negative counts, broken totals, ...).
class DataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Counts recorded in one of the 24 measurement settings. `attempts` counts
/// photons delivered to the analyzer, so attempts = n_empty + sum(clicks).
/// ion[h] holds the (bright, dark) readouts that accompanied clicks on h,
/// hence clicks[h] = ion[h][0] + ion[h][1].
struct SettingCounts {
  bsa::TomographySetting setting;
  long long attempts = 0;
  long long n_empty = 0;
  std::array<long long, bsa::kDetectors> clicks{};
  std::array<std::array<long long, 2>, bsa::kDetectors> ion{};
};

struct ClickDataset {
  std::vector<SettingCounts> settings;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string label;

  /// Throws DataError describing the first violated invariant.
  void validate() const;
  long long detector_clicks(int h) const;
  long long total_attempts() const;
};

/// All-zero dataset over the standard 24 settings.
ClickDataset empty_dataset();

/// Born probabilities of every recorded outcome for one setting.
struct OutcomeProbabilities {
  double empty = 0.0;
  std::array<double, bsa::kDetectors> click{};
  /// P(click on h and ion outcome o), o = 0 bright, 1 dark.
  std::array<std::array<double, 2>, bsa::kDetectors> joint{};
};

OutcomeProbabilities outcome_probabilities(const DensityMatrix& rho_ip, const bsa::PhotonPOVM& povm,
                                           const std::array<ComplexMatrix, 2>& xi);

/// Samples `photons` analyzer events per setting from an ion (x) photon state.
/// Setting i draws from the stream (seed, i).
ClickDataset simulate_dataset(const DensityMatrix& rho_ip, const bsa::OpticsConfig& optics, long long photons,
                              std::uint64_t seed);

/// Negative log-likelihood -sum n log Tr(E rho) over a list of effects.
/// Optional groups add the Poisson term +N_g Tr(F_g rho), where F_g sums the
/// effects of one measurement and N_g its counts. This lets a Choi matrix
/// that is not forced to be trace preserving be fitted to counts without the
/// fit drifting along directions the conditional frequencies cannot see.
class LikelihoodModel {
 public:
  explicit LikelihoodModel(int dim) : dim_(dim) {}

  void add_term(const ComplexMatrix& effect, double count);
  void add_group(const ComplexMatrix& effect_sum, double count);

  int dim() const { return dim_; }
  double total_count() const { return total_; }

  /// +inf when an event with a nonzero count has zero probability.
  double value(const ComplexMatrix& rho) const;
  /// Value plus the Hermitian R with dNLL = Tr(R d rho).
  double value_and_gradient(const ComplexMatrix& rho, ComplexMatrix& r) const;

 private:
  struct Term {
    ComplexMatrix effect_t;  ///< transposed, so Tr(E rho) is an elementwise sum
    ComplexMatrix effect;
    double count;
  };
  int dim_;
  std::vector<Term> terms_;
  std::vector<Term> groups_;
  double total_ = 0.0;
};

/// Per-setting analyzer POVMs and (bright, dark) ion projectors.
struct MeasurementModel {
  std::vector<bsa::PhotonPOVM> povms;
  std::vector<std::array<ComplexMatrix, 2>> ion_projs;
};

MeasurementModel measurement_model(const ClickDataset& data, const bsa::OpticsConfig& optics);

LikelihoodModel state_likelihood(const ClickDataset& data, int detector, const MeasurementModel& model);

double neg_log_likelihood(const DensityMatrix& rho, const ClickDataset& data, int detector,
                          const std::vector<bsa::PhotonPOVM>& povms,
                          const std::vector<std::array<ComplexMatrix, 2>>& ion_projs);

struct MleFit {
  ComplexMatrix rho;
  double nll = 0.0;  ///< total, not normalized by counts
  int iterations = 0;
  bool converged = false;
};

/// rho = G G^dagger / Tr(G G^dagger) with G lower triangular and a real
/// diagonal, started from the maximally mixed point. The convergence
/// tolerances apply to the likelihood divided by the total count.
MleFit mle_fit(const LikelihoodModel& model, const lbfgs::Options& opts = {});

struct StateEstimate {
  DensityMatrix rho;
  double nll = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Throws DataError if the detector has no clicks.
StateEstimate mle_state(const ClickDataset& data, int detector, const bsa::OpticsConfig& optics);

// ---- channels and Choi matrices ----

using ChoiMatrix = ComplexMatrix;

ChoiMatrix choi_from_unitary(const ComplexMatrix& u);
ChoiMatrix choi_identity(int dim);
/// Superoperator S with vec(E(X)) = S vec(X).
ComplexMatrix superop_from_choi(const ChoiMatrix& chi);
ChoiMatrix choi_from_superop(const ComplexMatrix& s);
ComplexMatrix apply_channel(const ChoiMatrix& chi, const ComplexMatrix& x);
/// Channel "first, then second".
ChoiMatrix compose(const ChoiMatrix& second, const ChoiMatrix& first);
/// (1 - p) E + p * (completely depolarizing) applied after E.
ChoiMatrix depolarize(const ChoiMatrix& chi, double p);
/// Tensor product of channels acting on the first and second factor.
ChoiMatrix tensor_channels(const ChoiMatrix& a, const ChoiMatrix& b);

/// Throws PhysicsError unless chi is Hermitian, trace one and positive
/// to -1e-9. Returns the trace-preservation residual ||Tr_out chi - 1/d||_F.
double check_choi(const ChoiMatrix& chi);

/// Products of {|0>, |1>, |+>, |+i>} on both qubits, first qubit major.
std::vector<ComplexMatrix> process_preparations();
/// Nine Pauli-product bases (X, Y, Z on each qubit), each with four
/// outcome projectors ordered (0,0), (0,1), (1,0), (1,1).
std::vector<std::array<ComplexMatrix, 4>> process_measurements();

/// counts[k][b][o]: preparation k, measurement basis b, outcome o.
struct ProcessData {
  std::vector<ComplexMatrix> preparations;
  std::vector<std::array<std::array<double, 4>, 9>> counts;
};

struct ProcessEstimate {
  ChoiMatrix chi;
  double nll = 0.0;
  int iterations = 0;
  bool converged = false;
  double tp_residual = 0.0;  ///< reported, not enforced
};

/// Throws PhysicsError for a rank-deficient preparation set.
ProcessEstimate process_tomography(const ProcessData& data, const lbfgs::Options& opts = {});

/// Fits chi to measured output states: each output is converted to the
/// expected Pauli-basis frequencies at weight `shots` per basis.
ProcessEstimate process_tomography(const std::vector<ComplexMatrix>& inputs, const std::vector<DensityMatrix>& outputs,
                                   double shots = 1e4, const lbfgs::Options& opts = {});

/// Samples `shots` outcomes per (preparation, basis) through a channel.
ProcessData simulate_process_data(const ChoiMatrix& chi, long long shots, std::uint64_t seed);

double process_fidelity(const ChoiMatrix& chi_exp, const ChoiMatrix& chi_id);

/// Two-qubit channel on (network, logic). Feeds network phi (x) logic |down>,
/// keeps only network |down> outcomes and compares the renormalized map
/// phi -> logic output with the ideal conditional map diag(i, 1).
/// Throws PhysicsError when the postselection probability vanishes.
double conditional_subspace_fidelity(const ChoiMatrix& chi_exp);

}  // namespace qnode::tomo
