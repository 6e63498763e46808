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

#include "qnode/cli.hpp"

#include "qnode/bootstrap.hpp"
#include "qnode/config.hpp"
#include "qnode/dynamics.hpp"
#include "qnode/fidelity.hpp"
#include "qnode/protocol.hpp"
#include "qnode/serialize.hpp"
#include "qnode/stats.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>

namespace qnode::cli {
namespace {

namespace fs = std::filesystem;
using io::format_double;
using nlohmann::json;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::invalid_argument("cannot create output directory " + dir);
}

struct Manifest {
  std::string command;
  std::string digest;
  std::uint64_t seed = 0;
  std::string started = utc_now();
  json extra = json::object();

  void write(const std::string& dir, int exit_code) const {
    json j = {{"command", command}, {"config_digest", digest}, {"seed", seed},
              {"version", kVersion}, {"exit_code", exit_code}, {"started", started},
              {"finished", utc_now()}};
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    io::write_json(path_in(dir, "manifest.json"), j);
  }
};

// Maps exceptions onto exit codes with one diagnostic line.
int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const config::ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kInputError;
  } catch (const tomo::DataError& e) {
    log << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const dynamics::TruncationError& e) {
    log << "truncation error: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const PhysicsError& e) {
    log << "physics error: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const std::invalid_argument& e) {
    log << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

json detector_json(const protocol::DetectorAnalysis& d, int h, long long clicks) {
  json j = {{"detector", h}, {"clicks", clicks}, {"analyzed", d.analyzed}};
  if (d.analyzed) {
    j["fidelity"] = d.fidelity;
    j["converged"] = d.converged;
  }
  return j;
}

json analysis_json(const protocol::FidelityAnalysis& a, const tomo::ClickDataset& data) {
  json dets = json::array();
  for (int h = 0; h < bsa::kDetectors; ++h) dets.push_back(detector_json(a.detectors[h], h, data.detector_clicks(h)));
  json j = {{"detectors", dets}, {"converged", a.converged}, {"warnings", a.warnings}};
  j["average_fidelity"] = std::isfinite(a.average) ? json(a.average) : json(nullptr);
  return j;
}

std::string fidelity_text(const protocol::FidelityAnalysis& a) {
  return std::isfinite(a.average) ? format_double(a.average) : "nan";
}

double mean_attempts(const std::vector<protocol::ShotRecord>& shots, bool second) {
  double s = 0.0;
  for (const auto& r : shots) s += static_cast<double>(second ? r.attempts_2 : r.attempts_1);
  return shots.empty() ? 0.0 : s / static_cast<double>(shots.size());
}

void write_shots(const std::string& path, const std::vector<protocol::ShotRecord>& shots) {
  io::CsvTable t({"shot", "setting", "attempts_1", "attempts_2", "restarts", "storage_time"});
  for (std::size_t i = 0; i < shots.size(); ++i) {
    const auto& r = shots[i];
    t.row({std::to_string(i), std::to_string(r.setting), std::to_string(r.attempts_1), std::to_string(r.attempts_2),
           std::to_string(r.restarts), format_double(r.storage_time)});
  }
  io::write_file(path, t.str());
}

void record_warnings(std::ostream& log, const std::string& where, const protocol::FidelityAnalysis& a) {
  for (const auto& w : a.warnings) log << "warning: " << where << ": " << w << "\n";
}

int simulate_sequences(const SimulateOptions& opt, const config::Config& cfg, bool two_photon, std::ostream& log,
                       json& summary) {
  const std::vector<double>& times = two_photon ? cfg.run.delta_t : cfg.run.storage_times;
  const std::string stem = two_photon ? "two_photon" : "storage";
  io::CsvTable table(two_photon ? std::vector<std::string>{"time", "fidelity_pair_1", "fidelity_pair_2", "rejects",
                                                          "expected_rejects", "mean_attempts_1", "mean_attempts_2"}
                                : std::vector<std::string>{"time", "fidelity", "rejects", "expected_rejects",
                                                          "mean_attempts"});
  json rows = json::array();
  bool converged = true;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::uint64_t seed = opt.seed + i;
    const protocol::SequenceResult r =
        two_photon ? protocol::run_two_photon_sequence(opt.shots, cfg.protocol, times[i], seed)
                   : protocol::run_storage_sequence(opt.shots, cfg.protocol, times[i], cfg.run.dd, seed);
    const std::string tag = stem + "_" + std::to_string(i);
    tomo::ClickDataset d1 = r.pair_1;
    d1.config_digest = cfg.digest;
    io::save_dataset(path_in(opt.out, tag + "_pair_1.json"), d1);
    json row = {{"time", times[i]}, {"seed", seed}, {"rejects", r.rejects}, {"expected_rejects", r.expected_rejects},
                {"mean_attempts_1", mean_attempts(r.shots, false)}, {"pair_1", analysis_json(*r.analysis_1, d1)}};
    record_warnings(log, tag + " pair 1", *r.analysis_1);
    converged = converged && r.analysis_1->converged;
    if (two_photon) {
      tomo::ClickDataset d2 = r.pair_2;
      d2.config_digest = cfg.digest;
      io::save_dataset(path_in(opt.out, tag + "_pair_2.json"), d2);
      row["mean_attempts_2"] = mean_attempts(r.shots, true);
      row["pair_2"] = analysis_json(*r.analysis_2, d2);
      record_warnings(log, tag + " pair 2", *r.analysis_2);
      converged = converged && r.analysis_2->converged;
      table.row({format_double(times[i]), fidelity_text(*r.analysis_1), fidelity_text(*r.analysis_2),
                 std::to_string(r.rejects), format_double(r.expected_rejects),
                 format_double(mean_attempts(r.shots, false)), format_double(mean_attempts(r.shots, true))});
    } else {
      table.row({format_double(times[i]), fidelity_text(*r.analysis_1), std::to_string(r.rejects),
                 format_double(r.expected_rejects), format_double(mean_attempts(r.shots, false))});
    }
    write_shots(path_in(opt.out, tag + "_shots.csv"), r.shots);
    rows.push_back(row);
  }
  summary["table"] = rows;
  if (!two_photon) summary["dd"] = cfg.run.dd;
  io::write_file(path_in(opt.out, "fidelity_vs_time.csv"), table.str());
  return converged ? kOk : kDegraded;
}

json slope_json(const stats::LinearFit& f) {
  return {{"slope", f.slope}, {"slope_se", f.slope_se}, {"intercept", f.intercept}, {"intercept_se", f.intercept_se}};
}

int simulate_ramsey(const SimulateOptions& opt, const config::Config& cfg, json& summary) {
  io::CsvTable t({"fraction", "attempts", "phase", "phase_se", "contrast", "contrast_se"});
  std::vector<double> x, y, s;
  json rows = json::array();
  for (std::size_t i = 0; i < cfg.run.fractions.size(); ++i) {
    const auto r = protocol::run_ramsey_probe(cfg.run.fractions[i], cfg.run.ramsey_time, cfg.protocol.loop,
                                              cfg.protocol.storage, opt.shots, opt.seed + i);
    t.row({format_double(cfg.run.fractions[i]), std::to_string(r.attempts), format_double(r.phase),
           format_double(r.phase_se), format_double(r.contrast), format_double(r.contrast_se)});
    rows.push_back({{"fraction", cfg.run.fractions[i]}, {"attempts", r.attempts}, {"phase", r.phase},
                    {"phase_se", r.phase_se}, {"contrast", r.contrast}, {"contrast_se", r.contrast_se}});
    x.push_back(static_cast<double>(r.attempts));
    y.push_back(r.phase);
    s.push_back(r.phase_se);
  }
  io::write_file(path_in(opt.out, "ramsey.csv"), t.str());
  summary["table"] = rows;
  if (x.size() >= 3) summary["phase_per_attempt"] = slope_json(stats::linear_fit(x, y, s));
  return kOk;
}

int simulate_thermometry(const SimulateOptions& opt, const config::Config& cfg, json& summary) {
  io::CsvTable t({"fraction", "attempts", "n_bar", "n_bar_se", "n_bar_true"});
  std::vector<double> x, y, s;
  json rows = json::array();
  for (std::size_t i = 0; i < cfg.run.fractions.size(); ++i) {
    const auto r = protocol::run_thermometry_probe(cfg.run.fractions[i], cfg.run.thermometry_time, cfg.protocol.loop,
                                                   cfg.run.n_bar_base, opt.shots, opt.seed + i,
                                                   cfg.run.sideband_scale);
    t.row({format_double(cfg.run.fractions[i]), std::to_string(r.attempts), format_double(r.n_bar),
           format_double(r.n_bar_se), format_double(r.n_bar_true)});
    rows.push_back({{"fraction", cfg.run.fractions[i]}, {"attempts", r.attempts}, {"n_bar", r.n_bar},
                    {"n_bar_se", r.n_bar_se}, {"n_bar_true", r.n_bar_true}});
    x.push_back(static_cast<double>(r.attempts));
    y.push_back(r.n_bar);
    s.push_back(r.n_bar_se);
  }
  io::write_file(path_in(opt.out, "thermometry.csv"), t.str());
  summary["table"] = rows;
  if (x.size() >= 3) summary["heating_per_attempt"] = slope_json(stats::linear_fit(x, y, s));
  return kOk;
}

std::vector<int> parse_detectors(const std::string& spec) {
  if (spec == "all") return {0, 1, 2, 3};
  if (spec.size() == 1 && spec[0] >= '0' && spec[0] < '0' + bsa::kDetectors) return {spec[0] - '0'};
  throw std::invalid_argument("--detector must be 'all' or 0..3, got '" + spec + "'");
}

void write_matrix(const std::string& dir, const std::string& stem, const ComplexMatrix& m) {
  io::write_json(path_in(dir, stem + ".json"), io::matrix_to_json(m));
  io::write_file(path_in(dir, stem + ".csv"), io::matrix_to_csv(m));
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt, std::ostream& log) {
  Manifest m;
  m.command = "simulate " + opt.command;
  m.seed = opt.seed;
  return guarded(log, [&] {
    const config::Config cfg = config::load(opt.config);
    if (opt.shots < 1) throw std::invalid_argument("--shots must be at least 1");
    prepare_out(opt.out);
    m.digest = cfg.digest;
    m.extra["shots"] = opt.shots;
    json summary = {{"command", opt.command}, {"config_digest", cfg.digest}, {"seed", opt.seed}, {"shots", opt.shots}};
    int code = kOk;
    if (opt.command == "two-photon") code = simulate_sequences(opt, cfg, true, log, summary);
    else if (opt.command == "storage") code = simulate_sequences(opt, cfg, false, log, summary);
    else if (opt.command == "ramsey") code = simulate_ramsey(opt, cfg, summary);
    else if (opt.command == "thermometry") code = simulate_thermometry(opt, cfg, summary);
    else throw std::invalid_argument("unknown simulate command '" + opt.command + "'");
    io::write_json(path_in(opt.out, "summary.json"), summary);
    m.write(opt.out, code);
    return code;
  });
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& log) {
  Manifest m;
  m.command = "analyze";
  return guarded(log, [&] {
    const std::vector<int> detectors = parse_detectors(opt.detector);
    const tomo::ClickDataset data = io::load_dataset(opt.dataset);
    const bsa::OpticsConfig optics = config::load_optics(opt.optics);
    prepare_out(opt.out);
    m.digest = data.config_digest;
    m.seed = data.seed;

    const tomo::MeasurementModel model = tomo::measurement_model(data, optics);
    json dets = json::array();
    std::vector<std::string> warnings;
    io::CsvTable t({"detector", "clicks", "fidelity", "converged"});
    double sum = 0.0;
    int n = 0;
    bool converged = true;
    for (int h : detectors) {
      const long long clicks = data.detector_clicks(h);
      json d = {{"detector", h}, {"clicks", clicks}};
      if (clicks == 0) {
        warnings.push_back("detector " + std::to_string(h) + " has no clicks; skipped");
        d["analyzed"] = false;
        dets.push_back(d);
        continue;
      }
      const tomo::MleFit fit = tomo::mle_fit(tomo::state_likelihood(data, h, model));
      const DensityMatrix rho = DensityMatrix::project(fit.rho);
      const double f = fidelity::entangled_fraction_fidelity(rho);
      if (!fit.converged) {
        converged = false;
        warnings.push_back("detector " + std::to_string(h) + ": likelihood maximization did not converge");
      }
      d["analyzed"] = true;
      d["fidelity"] = f;
      d["converged"] = fit.converged;
      d["nll"] = fit.nll;
      d["iterations"] = fit.iterations;
      dets.push_back(d);
      write_matrix(opt.out, "rho_" + std::to_string(h), rho.matrix());
      t.row({std::to_string(h), std::to_string(clicks), format_double(f), fit.converged ? "1" : "0"});
      sum += f;
      ++n;
    }
    for (const auto& w : warnings) log << "warning: " << w << "\n";
    json out = {{"dataset", data.label}, {"detectors", dets}, {"warnings", warnings}, {"converged", converged}};
    out["average_fidelity"] = n > 0 ? json(sum / n) : json(nullptr);
    io::write_json(path_in(opt.out, "analysis.json"), out);
    io::write_file(path_in(opt.out, "analysis.csv"), t.str());
    const int code = converged ? kOk : kDegraded;
    m.write(opt.out, code);
    return code;
  });
}

int cmd_bootstrap(const BootstrapOptions& opt, std::ostream& log) {
  Manifest m;
  m.command = "bootstrap";
  m.seed = opt.seed;
  return guarded(log, [&] {
    if (opt.replicates < 1) throw std::invalid_argument("--replicates must be at least 1");
    if (opt.workers < 1) throw std::invalid_argument("--workers must be at least 1");
    const tomo::ClickDataset data = io::load_dataset(opt.dataset);
    const bsa::OpticsConfig optics = config::load_optics(opt.optics);
    prepare_out(opt.out);
    m.digest = data.config_digest;
    m.extra["replicates"] = opt.replicates;

    const tomo::MeasurementModel model = tomo::measurement_model(data, optics);
    bootstrap::ResamplingSpec spec;
    spec.replicates = opt.replicates;
    spec.seed = opt.seed;
    spec.workers = opt.workers;

    json rows = json::array();
    io::CsvTable t({"detector", "point", "lo", "hi", "replicates", "failures"});
    for (int h = 0; h < bsa::kDetectors; ++h) {
      if (data.detector_clicks(h) == 0) {
        log << "warning: detector " << h << " has no clicks; skipped\n";
        rows.push_back({{"detector", h}, {"analyzed", false}});
        continue;
      }
      const bootstrap::Interval ci = bootstrap::bootstrap_ci(data, spec, [&](const tomo::ClickDataset& d) {
        if (d.detector_clicks(h) == 0) throw tomo::DataError("no clicks in replicate");
        const tomo::MleFit fit = tomo::mle_fit(tomo::state_likelihood(d, h, model));
        return fidelity::entangled_fraction_fidelity(DensityMatrix::project(fit.rho));
      });
      rows.push_back({{"detector", h}, {"analyzed", true}, {"point", ci.point}, {"lo", ci.lo}, {"hi", ci.hi},
                      {"replicates", ci.replicates}, {"failures", ci.failures}});
      t.row({std::to_string(h), format_double(ci.point), format_double(ci.lo), format_double(ci.hi),
             std::to_string(ci.replicates), std::to_string(ci.failures)});
    }
    io::write_json(path_in(opt.out, "bootstrap.json"),
                   {{"dataset", data.label}, {"seed", opt.seed}, {"replicates", opt.replicates}, {"level", 0.95},
                    {"statistic", spec.statistic}, {"detectors", rows}});
    io::write_file(path_in(opt.out, "bootstrap.csv"), t.str());
    m.write(opt.out, kOk);
    return int(kOk);
  });
}

int cmd_process_tomo(const ProcessTomoOptions& opt, std::ostream& log) {
  Manifest m;
  m.command = "process-tomo";
  m.seed = opt.seed;
  return guarded(log, [&] {
    const config::Config cfg = config::load(opt.config);
    prepare_out(opt.out);
    m.digest = cfg.digest;
    const protocol::ProtocolConfig& p = cfg.protocol;

    json gate = {{"simulated", p.simulate_gate}};
    tomo::ChoiMatrix zz = dynamics::ideal_zz_gate(kPi / 4.0);
    int sign = 1;
    if (p.simulate_gate) {
      const dynamics::GateResult g = dynamics::gate_propagate(p.crystal, p.gate);
      zz = g.choi;
      sign = g.phase < 0.0 ? -1 : 1;
      gate.update({{"omega", g.omega}, {"duration", g.duration}, {"phase", g.phase}, {"fidelity", g.fidelity},
                   {"max_top_population", g.max_top_population}});
    }
    const tomo::ChoiMatrix truth = dynamics::iswap_circuit(zz, p.sq_error, sign);
    const tomo::ProcessData data = tomo::simulate_process_data(truth, cfg.run.process_shots, opt.seed);
    const tomo::ProcessEstimate est = tomo::process_tomography(data);
    const tomo::ChoiMatrix ideal = tomo::choi_from_unitary(dynamics::iswap_unitary());
    const double fp = tomo::process_fidelity(est.chi, ideal);
    const double fc = tomo::conditional_subspace_fidelity(est.chi);
    if (!est.converged) log << "warning: process likelihood maximization did not converge\n";

    write_matrix(opt.out, "chi", est.chi);
    io::write_json(path_in(opt.out, "summary.json"),
                   {{"config_digest", cfg.digest}, {"seed", opt.seed}, {"shots", cfg.run.process_shots},
                    {"process_fidelity", fp}, {"conditional_fidelity", fc},
                    {"true_process_fidelity", tomo::process_fidelity(truth, ideal)},
                    {"tp_residual", est.tp_residual}, {"converged", est.converged}, {"iterations", est.iterations},
                    {"gate", gate}});
    const int code = est.converged ? kOk : kDegraded;
    m.write(opt.out, code);
    return code;
  });
}

}  // namespace qnode::cli
