// Copyright 2026 The fsinfo-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FSINFO_CONFIG_H_
#define FSINFO_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fsinfo {

// Sectioned key=value text config:
//
//   [model]
//   layers = dense:64, relu, dense:10
//   ; comment
//
// Keys are addressed as "section.key". Later Set() calls override parsed
// values, which is how CLI flags take precedence over files.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(const std::string& text);
  static KeyValueConfig Load(const std::string& path);

  bool Has(const std::string& key) const;
  std::optional<std::string> Get(const std::string& key) const;
  std::string GetString(const std::string& key,
                        const std::string& fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  std::int64_t GetInt(const std::string& key, std::int64_t fallback) const;
  std::vector<double> GetDoubleList(const std::string& key) const;
  std::vector<std::int64_t> GetIntList(const std::string& key) const;
  std::string Require(const std::string& key) const;

  void Set(const std::string& key, const std::string& value);
  // Applies "section.key=value".
  void SetAssignment(const std::string& assignment);

  // Canonical text form (sorted by section then key).
  std::string ToString() const;
  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace fsinfo

#endif  // FSINFO_CONFIG_H_
