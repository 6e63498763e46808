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

#include "qnode/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qnode::io {
namespace {

using tomo::DataError;

long long count_at(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw DataError(where + ": expected an integer count");
  const long long v = j.get<long long>();
  if (v < 0) throw DataError(where + ": negative count " + std::to_string(v));
  return v;
}

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw DataError(where + ": missing key '" + key + "'");
  return j.at(key);
}

double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) throw DataError(where + ": expected a number");
  return j.get<double>();
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json dataset_to_json(const tomo::ClickDataset& data) {
  json settings = json::array();
  for (std::size_t i = 0; i < data.settings.size(); ++i) {
    const tomo::SettingCounts& s = data.settings[i];
    json ion = json::array();
    for (const auto& h : s.ion) ion.push_back({{"bright", h[0]}, {"dark", h[1]}});
    settings.push_back({{"index", i},
                        {"photon", {{"hwp_angle", s.setting.photon.hwp_angle}, {"qwp_angle", s.setting.photon.qwp_angle}}},
                        {"ion", {{"vartheta", s.setting.ion.vartheta}, {"varphi", s.setting.ion.varphi}}},
                        {"attempts", s.attempts},
                        {"n_empty", s.n_empty},
                        {"clicks", s.clicks},
                        {"ion_outcomes", ion}});
  }
  return {{"schema", kDatasetSchema},
          {"label", data.label},
          {"seed", data.seed},
          {"config_digest", data.config_digest},
          {"settings", settings}};
}

tomo::ClickDataset dataset_from_json(const json& j) {
  if (!j.is_object()) throw DataError("dataset: expected a JSON object");
  if (member(j, "schema", "dataset") != kDatasetSchema)
    throw DataError(std::string("dataset: unsupported schema, expected ") + kDatasetSchema);
  tomo::ClickDataset d;
  if (j.contains("label")) d.label = j.at("label").get<std::string>();
  if (j.contains("config_digest")) d.config_digest = j.at("config_digest").get<std::string>();
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw DataError("dataset.seed: expected a non-negative integer");
    d.seed = j.at("seed").get<std::uint64_t>();
  }
  const json& settings = member(j, "settings", "dataset");
  if (!settings.is_array()) throw DataError("dataset.settings: expected an array");
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const std::string at = "dataset.settings[" + std::to_string(i) + "]";
    const json& s = settings[i];
    tomo::SettingCounts c;
    const json& ph = member(s, "photon", at);
    c.setting.photon.hwp_angle = number_at(member(ph, "hwp_angle", at + ".photon"), at + ".photon.hwp_angle");
    c.setting.photon.qwp_angle = number_at(member(ph, "qwp_angle", at + ".photon"), at + ".photon.qwp_angle");
    const json& io = member(s, "ion", at);
    c.setting.ion.vartheta = number_at(member(io, "vartheta", at + ".ion"), at + ".ion.vartheta");
    c.setting.ion.varphi = number_at(member(io, "varphi", at + ".ion"), at + ".ion.varphi");
    c.attempts = count_at(member(s, "attempts", at), at + ".attempts");
    c.n_empty = count_at(member(s, "n_empty", at), at + ".n_empty");
    const json& clicks = member(s, "clicks", at);
    const json& ion = member(s, "ion_outcomes", at);
    if (!clicks.is_array() || clicks.size() != bsa::kDetectors)
      throw DataError(at + ".clicks: expected " + std::to_string(bsa::kDetectors) + " entries");
    if (!ion.is_array() || ion.size() != bsa::kDetectors)
      throw DataError(at + ".ion_outcomes: expected " + std::to_string(bsa::kDetectors) + " entries");
    for (int h = 0; h < bsa::kDetectors; ++h) {
      const std::string ah = at + ".ion_outcomes[" + std::to_string(h) + "]";
      c.clicks[h] = count_at(clicks[h], at + ".clicks[" + std::to_string(h) + "]");
      c.ion[h][0] = count_at(member(ion[h], "bright", ah), ah + ".bright");
      c.ion[h][1] = count_at(member(ion[h], "dark", ah), ah + ".dark");
    }
    d.settings.push_back(c);
  }
  d.validate();
  return d;
}

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return {{"schema", kMatrixSchema}, {"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

ComplexMatrix matrix_from_json(const json& j) {
  const Eigen::Index rows = member(j, "rows", "matrix").get<Eigen::Index>();
  const Eigen::Index cols = member(j, "cols", "matrix").get<Eigen::Index>();
  const json& data = member(j, "data", "matrix");
  if (rows < 0 || cols < 0 || !data.is_array() || static_cast<Eigen::Index>(data.size()) != rows)
    throw DataError("matrix: data does not match rows");
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = data[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw DataError("matrix: row " + std::to_string(r) + " does not match cols");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& e = row[c];
      if (!e.is_array() || e.size() != 2) throw DataError("matrix: entries must be [re, im] pairs");
      m(r, c) = cplx(number_at(e[0], "matrix"), number_at(e[1], "matrix"));
    }
  }
  return m;
}

std::string matrix_to_csv(const ComplexMatrix& m) {
  CsvTable t({"row", "col", "re", "im"});
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      t.row({std::to_string(r), std::to_string(c), format_double(m(r, c).real()), format_double(m(r, c).imag())});
  return t.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << bytes;
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

tomo::ClickDataset load_dataset(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  try {
    return dataset_from_json(j);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void save_dataset(const std::string& path, const tomo::ClickDataset& data) { write_json(path, dataset_to_json(data)); }

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) { row(header); }

CsvTable& CsvTable::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw std::invalid_argument("csv row width mismatch");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_ += ',';
    text_ += fields[i];
  }
  text_ += '\n';
  return *this;
}

std::string CsvTable::str() const { return text_; }

}  // namespace qnode::io
