// Copyright 2026 The mimu Authors
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

#include "mimu/json_util.hpp"

#include <algorithm>
#include <fstream>

namespace mimu::jsonu {

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput("cannot open file: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidInput("JSON parse error in " + path + ": " + e.what());
  }
  return j;
}

void require_keys_in(const json& obj, std::initializer_list<const char*> allowed,
                     const std::string& context) {
  if (!obj.is_object()) {
    throw InvalidInput(context + ": expected a JSON object");
  }
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) {
      throw InvalidInput(context + ": unknown key \"" + item.key() + "\"");
    }
  }
}

void require_schema_version(const json& obj, int expected,
                            const std::string& context) {
  if (!obj.contains("schema_version")) {
    throw InvalidInput(context + ": missing schema_version");
  }
  const int got = obj.at("schema_version").get<int>();
  if (got != expected) {
    throw InvalidInput(context + ": unsupported schema_version " +
                       std::to_string(got) + " (expected " +
                       std::to_string(expected) + ")");
  }
}

double get_number(const json& obj, const std::string& key,
                  const std::string& context) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw InvalidInput(context + ": missing or non-numeric \"" + key + "\"");
  }
  return obj.at(key).get<double>();
}

double get_number_or(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<double>();
}

}  // namespace mimu::jsonu
