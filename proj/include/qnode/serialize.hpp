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

// serialize.hpp: JSON and CSV forms of datasets, matrices and result tables.
// Schemas are documented in docs/schemas/.

#pragma once

#include "qnode/tomo.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace qnode::io {

using nlohmann::json;

inline constexpr const char* kDatasetSchema = "qnode.click_dataset/1";
inline constexpr const char* kMatrixSchema = "qnode.matrix/1";

json dataset_to_json(const tomo::ClickDataset& data);
/// Throws tomo::DataError on a schema violation or broken count invariants.
tomo::ClickDataset dataset_from_json(const json& j);

/// {"schema", "rows", "cols", "data": [[[re, im], ...], ...]}, row-major.
json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);

/// One row per matrix element: row,col,re,im.
std::string matrix_to_csv(const ComplexMatrix& m);

/// Bytes of a file; throws std::runtime_error when it cannot be read.
std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes: truncate and write.
void write_file(const std::string& path, const std::string& bytes);
/// Pretty-printed JSON with a trailing newline.
void write_json(const std::string& path, const json& j);

tomo::ClickDataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const tomo::ClickDataset& data);

/// Shortest text that reads back to the same double.
std::string format_double(double x);

/// Minimal CSV writer; fields are numbers or plain identifiers, so no quoting.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(const std::vector<std::string>& fields);
  std::string str() const;

 private:
  std::size_t width_;
  std::string text_;
};

}  // namespace qnode::io
