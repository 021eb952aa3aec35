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

#include "fsinfo/model_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fsinfo/errors.h"
#include "json.hpp"

namespace fsinfo {
namespace {

constexpr const char* kFormat = "fsinfo-splitnet";
constexpr int kVersion = 1;

void AppendLittleEndian(std::string& out, double value) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  for (int b = 0; b < 8; ++b) {
    out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
  }
}

double ReadLittleEndian(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
  return std::bit_cast<double>(bits);
}

}  // namespace

Shape ParseShape(const std::string& text) {
  Shape shape;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, 'x')) {
    try {
      std::size_t used = 0;
      long v = std::stol(part, &used);
      if (used != part.size() || v <= 0) throw std::invalid_argument(part);
      shape.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw ParameterError("bad shape '" + text + "'");
    }
  }
  if (shape.empty()) throw ParameterError("empty shape");
  return shape;
}

NetConfig ParseNetConfig(const KeyValueConfig& config) {
  NetConfig out;
  out.input_shape = ParseShape(config.Require("model.input_shape"));
  out.layers = ParseLayerSpecs(config.Require("model.layers"));
  const auto split = config.GetInt("model.split_point",
                                   static_cast<std::int64_t>(out.layers.size()));
  if (split < 1) throw ParameterError("model.split_point must be >= 1");
  out.split_point = static_cast<std::size_t>(split);
  const auto seed = config.GetInt("model.seed", 0);
  if (seed < 0) throw ParameterError("model.seed must be >= 0");
  out.seed = static_cast<std::uint64_t>(seed);
  return out;
}

SplitNet BuildNet(const NetConfig& config) {
  return SplitNet::Build(config.input_shape, config.layers, config.split_point,
                         config.seed);
}

std::string SerializeParameters(const SplitNet& net) {
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["byte_order"] = "little";
  header["dtype"] = "float64";
  header["input_shape"] = net.input_shape();
  header["split_point"] = net.split_point();
  header["seed"] = net.seed();
  std::size_t total = 0;
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& l : net.layers()) {
    nlohmann::json entry;
    entry["spec"] = LayerSpecToString(l.spec);
    entry["in_shape"] = l.in_shape;
    entry["out_shape"] = l.out_shape;
    nlohmann::json params = nlohmann::json::array();
    if (l.HasParameters()) {
      Shape wshape = l.spec.kind == LayerKind::kDense
                         ? Shape{l.out_size(), l.in_size()}
                         : Shape{l.spec.units, l.in_shape[0], l.spec.kernel,
                                 l.spec.kernel};
      params.push_back({{"name", "weight"}, {"shape", wshape}});
      params.push_back({{"name", "bias"}, {"shape", Shape{l.bias.size()}}});
      total += l.weight.size() + l.bias.size();
    }
    entry["params"] = params;
    layers.push_back(entry);
  }
  header["layers"] = layers;
  header["num_values"] = total;

  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + 8 * total);
  for (const Layer& l : net.layers()) {
    for (double w : l.weight) AppendLittleEndian(out, w);
    for (double b : l.bias) AppendLittleEndian(out, b);
  }
  return out;
}

SplitNet DeserializeParameters(const std::string& bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) {
    throw FormatError("parameter file has no header line", 0);
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad parameter header: ") + e.what(), 0);
  }
  try {
    if (header.at("format") != kFormat || header.at("version") != kVersion) {
      throw FormatError("unsupported parameter file format", 0);
    }
    const Shape input_shape = header.at("input_shape").get<Shape>();
    const auto split = header.at("split_point").get<std::size_t>();
    const auto seed = header.at("seed").get<std::uint64_t>();
    const auto total = header.at("num_values").get<std::size_t>();
    const std::size_t payload = bytes.size() - newline - 1;
    if (payload != 8 * total) {
      throw FormatError("parameter payload has " + std::to_string(payload) +
                            " bytes, header declares " +
                            std::to_string(8 * total),
                        newline + 1 + std::min(payload, 8 * total));
    }
    const auto* p =
        reinterpret_cast<const unsigned char*>(bytes.data() + newline + 1);
    std::vector<Layer> layers;
    for (const auto& entry : header.at("layers")) {
      auto specs = ParseLayerSpecs(entry.at("spec").get<std::string>());
      if (specs.size() != 1) throw FormatError("bad layer spec in header", 0);
      Layer layer;
      layer.spec = specs[0];
      layer.in_shape = entry.at("in_shape").get<Shape>();
      layer.out_shape = entry.at("out_shape").get<Shape>();
      for (const auto& param : entry.at("params")) {
        const Shape shape = param.at("shape").get<Shape>();
        std::vector<double> values(NumElements(shape));
        for (double& v : values) {
          v = ReadLittleEndian(p);
          p += 8;
        }
        if (param.at("name") == "weight") {
          layer.weight = std::move(values);
        } else {
          layer.bias = std::move(values);
        }
      }
      layers.push_back(std::move(layer));
    }
    return SplitNet(input_shape, std::move(layers), split, seed);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad parameter header: ") + e.what(), 0);
  }
}

void SaveParameters(const SplitNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path);
  const std::string bytes = SerializeParameters(net);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

SplitNet LoadParameters(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return DeserializeParameters(buffer.str());
}

void WriteFloat64(const std::string& path, const std::vector<Tensor>& batch) {
  std::string bytes;
  for (const Tensor& t : batch) {
    for (double v : t.values()) AppendLittleEndian(bytes, v);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace fsinfo
