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

// qnode: command-line front end. Options can also be set through QNODE_*
// environment variables (QNODE_CONFIG, QNODE_SEED, QNODE_SHOTS, QNODE_OUT,
// QNODE_DETECTOR, QNODE_OPTICS, QNODE_REPLICATES, QNODE_WORKERS); explicit
// flags win.

#include "qnode/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace qnode::cli;
  CLI::App app{"Simulation and analysis toolkit for a trapped-ion quantum network node"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a protocol sequence and write datasets");
  simulate->add_option("command", sim.command, "two-photon | storage | ramsey | thermometry")
      ->required()
      ->check(CLI::IsMember({"two-photon", "storage", "ramsey", "thermometry"}));
  simulate->add_option("--config", sim.config, "Configuration file")->required()->envname("QNODE_CONFIG");
  simulate->add_option("--seed", sim.seed, "Random seed")->envname("QNODE_SEED");
  simulate->add_option("--shots", sim.shots, "Shots per run")->envname("QNODE_SHOTS");
  simulate->add_option("--out", sim.out, "Output directory")->envname("QNODE_OUT");

  AnalyzeOptions ana;
  auto* analyze = app.add_subcommand("analyze", "Maximum-likelihood tomography of a click dataset");
  analyze->add_option("dataset", ana.dataset, "Dataset JSON")->required();
  analyze->add_option("--detector", ana.detector, "all or 0..3")->envname("QNODE_DETECTOR");
  analyze->add_option("--optics", ana.optics, "Optics preset or config file")->envname("QNODE_OPTICS");
  analyze->add_option("--out", ana.out, "Output directory")->envname("QNODE_OUT");

  BootstrapOptions boot;
  auto* bootstrap = app.add_subcommand("bootstrap", "Bootstrap confidence intervals of the state fidelity");
  bootstrap->add_option("dataset", boot.dataset, "Dataset JSON")->required();
  bootstrap->add_option("--replicates", boot.replicates, "Bootstrap replicates")->envname("QNODE_REPLICATES");
  bootstrap->add_option("--seed", boot.seed, "Random seed")->envname("QNODE_SEED");
  bootstrap->add_option("--workers", boot.workers, "Worker threads")->envname("QNODE_WORKERS");
  bootstrap->add_option("--optics", boot.optics, "Optics preset or config file")->envname("QNODE_OPTICS");
  bootstrap->add_option("--out", boot.out, "Output directory")->envname("QNODE_OUT");

  ProcessTomoOptions proc;
  auto* process = app.add_subcommand("process-tomo", "Process tomography of the configured iSWAP circuit");
  process->add_option("--config", proc.config, "Configuration file")->required()->envname("QNODE_CONFIG");
  process->add_option("--seed", proc.seed, "Random seed")->envname("QNODE_SEED");
  process->add_option("--out", proc.out, "Output directory")->envname("QNODE_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*simulate) return cmd_simulate(sim, std::cerr);
  if (*analyze) return cmd_analyze(ana, std::cerr);
  if (*bootstrap) return cmd_bootstrap(boot, std::cerr);
  return cmd_process_tomo(proc, std::cerr);
}
