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

#include "qnode/config.hpp"

#include "qnode/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace qnode::config {
namespace {

using nlohmann::json;

// Reads the members of one JSON object, remembering which keys were used so
// that leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json* take(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(key_path(key), "must be finite");
    }
  }

  // Value given in cycles per second, stored as an angular frequency.
  void hertz(const std::string& key, double& out) {
    double f = out / (2.0 * kPi);
    number(key, f);
    out = 2.0 * kPi * f;
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void integer(const std::string& key, long long& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
      out = v->get<long long>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  template <std::size_t N>
  void numbers(const std::string& key, std::array<double, N>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array() || v->size() != N)
        throw ConfigError(key_path(key), "expected an array of " + std::to_string(N) + " numbers");
      for (std::size_t i = 0; i < N; ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected a number");
        out[i] = (*v)[i].get<double>();
      }
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array() || v->empty()) throw ConfigError(key_path(key), "expected a non-empty array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(key_path(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// "<field> must ..." messages from the physics validators become key paths.
template <class F>
void validated(const std::string& fallback, F&& check) {
  try {
    check();
  } catch (const PhysicsError& e) {
    const std::string msg = e.what();
    const auto space = msg.find(' ');
    const std::string first = msg.substr(0, space);
    if (space != std::string::npos && first.find('.') != std::string::npos)
      throw ConfigError(first, msg.substr(space + 1));
    throw ConfigError(fallback, msg);
  }
}

// A required section that is either a preset name or an object with an
// optional "preset" member.
template <class T, class Preset, class Fields>
T preset_section(const json& root, const std::string& key, Preset&& preset, Fields&& fields) {
  if (!root.contains(key)) throw ConfigError(key, "missing required key");
  const json& j = root.at(key);
  if (j.is_string()) {
    try {
      return preset(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  }
  Section s(j, key);
  T out{};
  if (const json* p = s.take("preset")) {
    if (!p->is_string()) throw ConfigError(key + ".preset", "expected a preset name");
    try {
      out = preset(p->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ".preset", e.what());
    }
  } else {
    out = preset("");
  }
  fields(s, out);
  s.finish();
  return out;
}

void optics_fields(Section& s, bsa::OpticsConfig& o) {
  s.number("r_qwp", o.r_qwp);
  s.number("r_hwp", o.r_hwp);
  s.number("beta_qwp", o.beta_qwp);
  s.number("beta_hwp", o.beta_hwp);
  s.number("t_bs_H", o.t_bs_H);
  s.number("t_bs_V", o.t_bs_V);
  s.number("eps_A_H", o.eps_A_H);
  s.number("eps_A_V", o.eps_A_V);
  s.number("eps_B_H", o.eps_B_H);
  s.number("eps_B_V", o.eps_B_V);
  s.numbers("eta", o.eta);
}

void crystal_fields(Section& s, dynamics::CrystalConfig& c) {
  s.number("mass_1", c.mass_1);
  s.number("mass_2", c.mass_2);
  if (s.has("omega_1") && s.has("f_ip_hz")) throw ConfigError(s.key_path("f_ip_hz"), "conflicts with omega_1");
  s.number("omega_1", c.omega_1);
  if (s.has("f_ip_hz")) {
    double f = 0.0;
    s.number("f_ip_hz", f);
    if (!(f > 0.0)) throw ConfigError(s.key_path("f_ip_hz"), "must be positive");
    c.omega_1 = dynamics::omega_1_from_ip(c.mu(), 2.0 * kPi * f);
  } else if (s.has("mass_1") || s.has("mass_2")) {
    // Keep the in-phase mode where the preset put it when the masses change.
    const double ip = dynamics::axial_mode_frequencies(dynamics::CrystalConfig::sr88_ca43().mu(),
                                                       dynamics::CrystalConfig::sr88_ca43().omega_1)
                          .ip;
    if (!s.has("omega_1")) c.omega_1 = dynamics::omega_1_from_ip(c.mu(), ip);
  }
  s.number("n_bar_oop", c.n_bar_oop);
  s.number("n_bar_ip", c.n_bar_ip);
  s.number("heat_rate_oop", c.heat_rate_oop);
  s.number("heat_rate_ip", c.heat_rate_ip);
  s.integer("n_max", c.n_max);
}

void gate_fields(Section& s, dynamics::GateConfig& g) {
  s.hertz("delta_hz", g.delta);
  s.numbers("eta_oop", g.eta_oop);
  s.numbers("eta_ip", g.eta_ip);
  s.number("omega", g.omega);
  s.integer("walsh_order", g.walsh_order);
  s.number("duration", g.duration);
  s.boolean("ip_coupling", g.ip_coupling);
  s.boolean("second_order", g.second_order);
  s.number("target_phase", g.target_phase);
}

void storage_fields(Section& s, dynamics::StorageNoiseConfig& n) {
  s.number("b_noise_rms", n.b_noise_rms);
  s.number("sens_network", n.sens_network);
  s.number("sens_memory", n.sens_memory);
  s.number("leak_rate", n.leak_rate);
  s.boolean("transported", n.transported);
  s.integer("dd_pulses", n.dd_pulses);
  s.number("white_floor", n.white_floor);
  s.number("debye_waller_eta", n.debye_waller_eta);
}

void transfer_fields(Section& s, dynamics::TransferConfig& t) {
  s.number("delta_f", t.delta_f);
  s.number("t_pi", t.t_pi);
  s.number("delay", t.delay);
  s.number("spectator_ratio", t.spectator_ratio);
}

void loop_fields(Section& s, protocol::AttemptLoopConfig& l) {
  s.number("success_prob", l.success_prob);
  s.number("attempt_period", l.attempt_period);
  s.number("light_shift_per_attempt", l.light_shift_per_attempt);
  s.number("heating_per_attempt", l.heating_per_attempt);
}

void protocol_fields(Section& s, protocol::ProtocolConfig& p) {
  s.boolean("simulate_gate", p.simulate_gate);
  s.number("sq_error", p.sq_error);
  s.number("state_prep_error", p.state_prep_error);
  s.number("spam_error", p.spam_error);
  s.number("midcircuit_time", p.midcircuit_time);
}

void run_fields(Section& s, RunConfig& r) {
  s.numbers("delta_t", r.delta_t);
  s.numbers("storage_times", r.storage_times);
  s.boolean("dd", r.dd);
  s.numbers("fractions", r.fractions);
  s.number("ramsey_time", r.ramsey_time);
  s.number("thermometry_time", r.thermometry_time);
  s.number("n_bar_base", r.n_bar_base);
  s.number("sideband_scale", r.sideband_scale);
  s.integer("process_shots", r.process_shots);
}

void check_run(const RunConfig& r) {
  auto nonneg = [](const std::vector<double>& v, const std::string& key) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!(v[i] >= 0.0)) throw ConfigError(key + "[" + std::to_string(i) + "]", "must be non-negative");
  };
  nonneg(r.delta_t, "run.delta_t");
  nonneg(r.storage_times, "run.storage_times");
  for (std::size_t i = 0; i < r.fractions.size(); ++i)
    if (!(r.fractions[i] >= 0.0 && r.fractions[i] <= 1.0))
      throw ConfigError("run.fractions[" + std::to_string(i) + "]", "must lie in [0, 1]");
  if (!(r.ramsey_time > 0.0)) throw ConfigError("run.ramsey_time", "must be positive");
  if (!(r.thermometry_time > 0.0)) throw ConfigError("run.thermometry_time", "must be positive");
  if (!(r.n_bar_base >= 0.0)) throw ConfigError("run.n_bar_base", "must be non-negative");
  if (!(r.sideband_scale > 0.0 && r.sideband_scale <= 1.0)) throw ConfigError("run.sideband_scale", "must lie in (0, 1]");
  if (r.process_shots < 1) throw ConfigError("run.process_shots", "must be at least 1");
}

template <class T, class Fields>
void optional_section(const json& root, const std::string& key, T& out, Fields&& fields) {
  if (!root.contains(key)) return;
  Section s(root.at(key), key);
  fields(s, out);
  s.finish();
}

}  // namespace

bsa::OpticsConfig optics_preset(const std::string& name) {
  if (name.empty() || name == "measured") return bsa::OpticsConfig::measured();
  if (name == "ideal") return bsa::OpticsConfig::ideal();
  throw std::invalid_argument("unknown optics preset '" + name + "'");
}

dynamics::CrystalConfig crystal_preset(const std::string& name) {
  if (name.empty() || name == "sr88_ca43") return dynamics::CrystalConfig::sr88_ca43();
  if (name == "sr88_ca43_cold") {
    dynamics::CrystalConfig c = dynamics::CrystalConfig::sr88_ca43();
    c.n_bar_oop = 0.0;
    c.n_bar_ip = 0.0;
    c.heat_rate_oop = 0.0;
    c.heat_rate_ip = 0.0;
    c.n_max = 15;
    return c;
  }
  throw std::invalid_argument("unknown crystal preset '" + name + "'");
}

std::vector<std::string> optics_preset_names() { return {"measured", "ideal"}; }
std::vector<std::string> crystal_preset_names() { return {"sr88_ca43", "sr88_ca43_cold"}; }

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Config parse(const std::string& bytes) {
  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("<file>", "expected a JSON object at the top level");
  Section top(root, "");

  Config c;
  c.digest = fnv1a64_hex(bytes);
  protocol::ProtocolConfig& p = c.protocol;
  top.take("optics");
  top.take("crystal");
  p.optics = preset_section<bsa::OpticsConfig>(root, "optics", optics_preset, optics_fields);
  p.crystal = preset_section<dynamics::CrystalConfig>(root, "crystal", crystal_preset, crystal_fields);
  for (const char* key : {"gate", "storage", "transfer", "loop", "protocol", "run"}) top.take(key);
  optional_section(root, "gate", p.gate, gate_fields);
  optional_section(root, "storage", p.storage, storage_fields);
  optional_section(root, "transfer", p.transfer, transfer_fields);
  optional_section(root, "loop", p.loop, loop_fields);
  optional_section(root, "protocol", p, protocol_fields);
  optional_section(root, "run", c.run, run_fields);
  top.finish();

  validated("optics", [&] { p.optics.validate(); });
  validated("crystal", [&] { p.crystal.validate(); });
  validated("gate", [&] { p.gate.validate(); });
  validated("storage", [&] { p.storage.validate(); });
  validated("protocol", [&] { p.validate(); });
  check_run(c.run);
  return c;
}

Config load(const std::string& path) {
  std::string bytes;
  try {
    bytes = io::read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse(bytes);
}

bsa::OpticsConfig load_optics(const std::string& preset_or_path) {
  for (const std::string& name : optics_preset_names())
    if (preset_or_path == name) return optics_preset(name);
  std::string bytes;
  try {
    bytes = io::read_file(preset_or_path);
  } catch (const std::runtime_error&) {
    throw ConfigError("optics", "'" + preset_or_path + "' is neither a preset nor a readable file");
  }
  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
  }
  // Either a full config with an "optics" section or a bare optics object.
  const json wrapped = root.is_object() && root.contains("optics") ? root : json{{"optics", root}};
  bsa::OpticsConfig o = preset_section<bsa::OpticsConfig>(wrapped, "optics", optics_preset, optics_fields);
  validated("optics", [&] { o.validate(); });
  return o;
}

}  // namespace qnode::config
