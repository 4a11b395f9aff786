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

#ifndef MIMU_JSON_UTIL_HPP
#define MIMU_JSON_UTIL_HPP

#include <initializer_list>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace mimu {

/// Errors caused by bad user input (configs, logs, CLI arguments).
/// The CLI maps these to exit code 2.
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace jsonu {

using nlohmann::json;

json load_file(const std::string& path);

/// Fail-fast key policy: every key of `obj` must appear in `allowed`.
void require_keys_in(const json& obj, std::initializer_list<const char*> allowed,
                     const std::string& context);

void require_schema_version(const json& obj, int expected,
                            const std::string& context);

double get_number(const json& obj, const std::string& key,
                  const std::string& context);
double get_number_or(const json& obj, const std::string& key, double fallback);

}  // namespace jsonu
}  // namespace mimu

#endif  // MIMU_JSON_UTIL_HPP
