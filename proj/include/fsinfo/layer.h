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

#ifndef FSINFO_LAYER_H_
#define FSINFO_LAYER_H_

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsinfo/tensor.h"

namespace fsinfo {

enum class LayerKind { kDense, kRelu, kTanh, kConv2d, kAvgPool2d, kFlatten };
enum class Padding { kSame, kValid };

// Architecture-level description of a layer; input dims are inferred when
// the layer is placed in a network.
//
// Text form (used by config files): "dense:64", "relu", "tanh",
// "conv2d:8:3:same", "avgpool2d:2", "flatten".
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::size_t units = 0;   // dense: output features; conv2d: output channels
  std::size_t kernel = 0;  // conv2d / avgpool2d: square kernel size
  Padding padding = Padding::kValid;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

std::string LayerSpecToString(const LayerSpec& spec);
// Comma-separated list of layer specs.
std::vector<LayerSpec> ParseLayerSpecs(std::string_view text);
std::string LayerSpecsToString(std::span<const LayerSpec> specs);

// Throws ShapeError/ParameterError when `spec` cannot consume `in`.
Shape OutputShape(const LayerSpec& spec, const Shape& in);

// A concrete layer with parameters. Dense layers consume any input shape as
// a flat vector. Convolutions and pooling work on [channels, height, width].
struct Layer {
  LayerSpec spec;
  Shape in_shape;
  Shape out_shape;
  std::vector<double> weight;  // dense: [out][in]; conv2d: [oc][ic][k][k]
  std::vector<double> bias;    // dense: [out]; conv2d: [oc]

  bool HasParameters() const {
    return spec.kind == LayerKind::kDense || spec.kind == LayerKind::kConv2d;
  }
  std::size_t in_size() const { return NumElements(in_shape); }
  std::size_t out_size() const { return NumElements(out_shape); }
};

// Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Layer MakeLayer(const LayerSpec& spec, const Shape& in_shape,
                std::mt19937_64& rng);

// Dense layer with explicit row-major weights [out][in].
Layer MakeDense(std::size_t in, std::size_t out, std::vector<double> weight,
                std::vector<double> bias);

struct LayerGrads {
  std::vector<double> weight;
  std::vector<double> bias;
};

LayerGrads ZeroGrads(const Layer& layer);

void LayerForward(const Layer& layer, std::span<const double> in,
                  std::span<double> out);

// Jacobian-vector product of the layer linearized at `in`; `out` is the
// forward value at `in`. ReLU uses derivative 0 at a zero preactivation.
void LayerTangent(const Layer& layer, std::span<const double> in,
                  std::span<const double> out, std::span<const double> t_in,
                  std::span<double> t_out);

// Vector-Jacobian product. Writes dL/d(in) to g_in and, when `grads` is set,
// accumulates parameter gradients into it.
void LayerBackward(const Layer& layer, std::span<const double> in,
                   std::span<const double> out,
                   std::span<const double> g_out, std::span<double> g_in,
                   LayerGrads* grads);

}  // namespace fsinfo

#endif  // FSINFO_LAYER_H_
