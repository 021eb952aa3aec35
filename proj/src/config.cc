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

#include "fsinfo/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fsinfo/errors.h"

namespace fsinfo {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ToDouble(const std::string& key, const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParameterError("config key '" + key + "': '" + text +
                         "' is not a number");
  }
  return value;
}

std::int64_t ToInt(const std::string& key, const std::string& text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParameterError("config key '" + key + "': '" + text +
                         "' is not an integer");
  }
  return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::Parse(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw FormatError("config: " + e.message(), e.line());
  }
  KeyValueConfig config;
  for (const auto& [section, children] : tree) {
    if (children.empty()) {
      config.entries_[section] = Trim(children.data());
      continue;
    }
    for (const auto& [key, node] : children) {
      config.entries_[section + "." + key] = Trim(node.data());
    }
  }
  return config;
}

KeyValueConfig KeyValueConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

bool KeyValueConfig::Has(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::optional<std::string> KeyValueConfig::Get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::GetString(const std::string& key,
                                      const std::string& fallback) const {
  return Get(key).value_or(fallback);
}

double KeyValueConfig::GetDouble(const std::string& key,
                                 double fallback) const {
  auto v = Get(key);
  return v ? ToDouble(key, *v) : fallback;
}

std::int64_t KeyValueConfig::GetInt(const std::string& key,
                                    std::int64_t fallback) const {
  auto v = Get(key);
  return v ? ToInt(key, *v) : fallback;
}

std::vector<double> KeyValueConfig::GetDoubleList(
    const std::string& key) const {
  std::vector<double> out;
  if (auto v = Get(key)) {
    for (const auto& item : SplitList(*v)) out.push_back(ToDouble(key, item));
  }
  return out;
}

std::vector<std::int64_t> KeyValueConfig::GetIntList(
    const std::string& key) const {
  std::vector<std::int64_t> out;
  if (auto v = Get(key)) {
    for (const auto& item : SplitList(*v)) out.push_back(ToInt(key, item));
  }
  return out;
}

std::string KeyValueConfig::Require(const std::string& key) const {
  auto v = Get(key);
  if (!v) throw ParameterError("missing required config key '" + key + "'");
  return *v;
}

void KeyValueConfig::Set(const std::string& key, const std::string& value) {
  entries_[key] = Trim(value);
}

void KeyValueConfig::SetAssignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ParameterError("override '" + assignment +
                         "' is not of the form section.key=value");
  }
  Set(Trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::string KeyValueConfig::ToString() const {
  std::ostringstream out;
  std::string current_section = "\x01";
  for (const auto& [full_key, value] : entries_) {
    const auto dot = full_key.find('.');
    const std::string section =
        dot == std::string::npos ? "" : full_key.substr(0, dot);
    const std::string key =
        dot == std::string::npos ? full_key : full_key.substr(dot + 1);
    if (section != current_section) {
      if (!section.empty()) out << '[' << section << "]\n";
      current_section = section;
    }
    out << key << " = " << value << '\n';
  }
  return out.str();
}

}  // namespace fsinfo
