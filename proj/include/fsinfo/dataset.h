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

#ifndef FSINFO_DATASET_H_
#define FSINFO_DATASET_H_

#include <cstddef>
#include <string>
#include <vector>

#include "fsinfo/tensor.h"

namespace fsinfo {

// How one raw column was mapped into the normalized feature vector.
struct ColumnNormalization {
  enum class Kind { kContinuous, kOneHot };
  std::string name;
  Kind kind = Kind::kContinuous;
  std::size_t first_feature = 0;  // index into the normalized vector
  double min = 0.0;               // continuous only
  double max = 0.0;
  std::vector<std::string> categories;  // one-hot only, feature order
};

struct DatasetMeta {
  std::string name;
  // Human-readable description of the value map, e.g. "[0,255]->[-1,1]".
  std::string normalization;
  std::vector<ColumnNormalization> columns;
};

// Samples share `input_shape`. Normalized inputs lie in [-1, 1].
struct LabeledDataset {
  Shape input_shape;
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  std::size_t num_classes = 0;
  DatasetMeta meta;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
};

// Throws ParameterError when labels/inputs disagree or shapes differ.
void ValidateDataset(const LabeledDataset& ds);

// Rows [begin, end) as a new dataset. Train/test splits are always explicit.
LabeledDataset Slice(const LabeledDataset& ds, std::size_t begin,
                     std::size_t end);

// Coordinate-wise mean input.
Tensor MeanInput(const LabeledDataset& ds);

}  // namespace fsinfo

#endif  // FSINFO_DATASET_H_
