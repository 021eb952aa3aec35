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

#ifndef FSINFO_DATA_IO_H_
#define FSINFO_DATA_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fsinfo/dataset.h"

namespace fsinfo {

// MNIST-style IDX pair (images magic 0x00000803, labels 0x00000801,
// big-endian dims). Pixels map linearly [0, 255] -> [-1, 1]. Images come
// out as [1, rows, cols].
LabeledDataset LoadIdx(const std::string& images_path,
                       const std::string& labels_path);
LabeledDataset ParseIdx(const std::string& image_bytes,
                        const std::string& label_bytes);

// Header row required. Columns listed in `onehot_columns` become one unit
// vector per category (sorted); other non-label columns are min-max scaled
// to [-1, 1]. Labels are indexed in sorted order of their distinct values.
LabeledDataset LoadCsvTabular(const std::string& path,
                              const std::string& label_column,
                              const std::vector<std::string>& onehot_columns);
LabeledDataset ParseCsvTabular(const std::string& text,
                               const std::string& label_column,
                               const std::vector<std::string>& onehot_columns);

// Inverse of the continuous-column rescaling; returns one value per
// continuous column in column order.
std::vector<double> DenormalizeContinuous(const DatasetMeta& meta,
                                          const Tensor& x);

// Non-overlapping average pooling per channel.
LabeledDataset DownsampleImages(const LabeledDataset& ds, std::size_t factor);

enum class SynthKind { kBimodalDigits, kSpreadRgb, kGaussianTabular };
SynthKind ParseSynthKind(const std::string& name);
std::string SynthKindName(SynthKind kind);

// bimodal_digits: [1,8,8] images, pixels clustered near -1/+1 around ten
//   class templates; label = argmax of the planted template scores.
// spread_rgb: [3,8,8] images, pixels near-uniform on [-1, 1]; label =
//   argmax of a planted random linear map (10 classes).
// gaussian_tabular: 16 clipped Gaussian features; label = sign of a
//   planted linear score (2 classes).
LabeledDataset SynthGenerate(SynthKind kind, std::size_t n, std::uint64_t seed);

}  // namespace fsinfo

#endif  // FSINFO_DATA_IO_H_
