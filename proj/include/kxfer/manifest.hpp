// Copyright 2026 The kxfer Authors
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

#ifndef KXFER_MANIFEST_HPP_
#define KXFER_MANIFEST_HPP_

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kxfer/binary_io.hpp"
#include "kxfer/version.hpp"

namespace kxfer {

/// Written next to every CLI output as <output>.manifest.json. Contains no
/// timestamps, so equal manifests mean equal runs.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // path, fnv1a64 hex
  std::uint64_t seed = 0;

  void add_input(const std::string& path) {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(io::fnv1a64(io::read_file(path))));
    inputs.emplace_back(path, hex);
  }

  std::string to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["engine_version"] = kVersionString;
    j["seed"] = seed;
    j["parameters"] = parameters;
    nlohmann::ordered_json in = nlohmann::ordered_json::array();
    for (const auto& [path, hash] : inputs) {
      in.push_back(nlohmann::ordered_json{{"path", path}, {"fnv1a64", hash}});
    }
    j["inputs"] = in;
    return j.dump(2) + "\n";
  }

  void write_for(const std::string& output_path) const {
    io::write_file(output_path + ".manifest.json", to_json());
  }
};

}  // namespace kxfer

#endif  // KXFER_MANIFEST_HPP_
