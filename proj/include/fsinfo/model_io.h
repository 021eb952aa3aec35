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

#ifndef FSINFO_MODEL_IO_H_
#define FSINFO_MODEL_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fsinfo/config.h"
#include "fsinfo/layer.h"
#include "fsinfo/split_net.h"

namespace fsinfo {

// Architecture read from the [model] section of a key=value config:
//
//   [model]
//   input_shape = 1x8x8
//   layers = dense:64, relu, dense:32, relu, dense:10
//   split_point = 2
//   seed = 7
struct NetConfig {
  Shape input_shape;
  std::vector<LayerSpec> layers;
  std::size_t split_point = 1;
  std::uint64_t seed = 0;
};

Shape ParseShape(const std::string& text);  // "1x8x8" or "64"
NetConfig ParseNetConfig(const KeyValueConfig& config);
SplitNet BuildNet(const NetConfig& config);

// Parameter file: one line of JSON (shape manifest, architecture, split
// point, seed) terminated by '\n', followed by every weight then bias of
// every parametrized layer as little-endian float64.
void SaveParameters(const SplitNet& net, const std::string& path);
SplitNet LoadParameters(const std::string& path);

std::string SerializeParameters(const SplitNet& net);
SplitNet DeserializeParameters(const std::string& bytes);

// Flat little-endian float64 dump of a batch of tensors.
void WriteFloat64(const std::string& path, const std::vector<Tensor>& batch);

}  // namespace fsinfo

#endif  // FSINFO_MODEL_IO_H_
