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

#include "fsinfo/split_net.h"

#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "fsinfo/errors.h"

namespace fsinfo {
namespace {

bool AcceptsFlat(LayerKind kind) {
  return kind == LayerKind::kDense || kind == LayerKind::kFlatten ||
         kind == LayerKind::kRelu || kind == LayerKind::kTanh;
}

void ValidateLayer(const Layer& layer, const Shape& in, std::size_t index) {
  const std::string where = "layer " + std::to_string(index) + " (" +
                            LayerSpecToString(layer.spec) + ")";
  const bool ok = layer.in_shape == in ||
                  (AcceptsFlat(layer.spec.kind) &&
                   layer.in_size() == NumElements(in));
  if (!ok) {
    throw ShapeError(where + " expects input " +
                     ShapeToString(layer.in_shape) + ", got " +
                     ShapeToString(in));
  }
  if (OutputShape(layer.spec, layer.in_shape) != layer.out_shape) {
    throw ShapeError(where + " has inconsistent output shape");
  }
  std::size_t n_weight = 0, n_bias = 0;
  if (layer.spec.kind == LayerKind::kDense) {
    n_weight = layer.in_size() * layer.out_size();
    n_bias = layer.out_size();
  } else if (layer.spec.kind == LayerKind::kConv2d) {
    n_weight = layer.spec.units * layer.in_shape[0] * layer.spec.kernel *
               layer.spec.kernel;
    n_bias = layer.spec.units;
  }
  if (layer.weight.size() != n_weight || layer.bias.size() != n_bias) {
    throw ShapeError(where + " parameter sizes do not match its shapes");
  }
}

void CheckInput(const Tensor& x, const Shape& expected, const char* what) {
  if (x.shape() != expected &&
      !(x.size() == NumElements(expected) && x.shape().size() == 1 &&
        expected.size() == 1)) {
    throw ShapeError(std::string(what) + " shape " +
                     ShapeToString(x.shape()) + " does not match " +
                     ShapeToString(expected));
  }
}

}  // namespace

SplitNet::SplitNet(Shape input_shape, std::vector<Layer> layers,
                   std::size_t split_point, std::uint64_t seed)
    : input_shape_(std::move(input_shape)),
      layers_(std::move(layers)),
      split_point_(split_point),
      seed_(seed) {
  if (layers_.empty()) throw ParameterError("network has no layers");
  if (split_point_ < 1 || split_point_ > layers_.size()) {
    throw ParameterError("split point " + std::to_string(split_point_) +
                         " outside [1, " + std::to_string(layers_.size()) +
                         "]");
  }
  Shape current = input_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    ValidateLayer(layers_[i], current, i);
    current = layers_[i].out_shape;
  }
}

SplitNet SplitNet::Build(const Shape& input_shape,
                         std::span<const LayerSpec> specs,
                         std::size_t split_point, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  Shape current = input_shape;
  for (const LayerSpec& spec : specs) {
    layers.push_back(MakeLayer(spec, current, rng));
    current = layers.back().out_shape;
  }
  return SplitNet(input_shape, std::move(layers), split_point, seed);
}

const Shape& SplitNet::smashed_shape() const {
  return layers_[split_point_ - 1].out_shape;
}

const Shape& SplitNet::output_shape() const {
  return layers_.back().out_shape;
}

std::span<const Layer> SplitNet::bottom() const {
  return std::span<const Layer>(layers_).first(split_point_);
}

std::span<const Layer> SplitNet::top() const {
  return std::span<const Layer>(layers_).subspan(split_point_);
}

std::vector<LayerSpec> SplitNet::specs() const {
  std::vector<LayerSpec> out;
  out.reserve(layers_.size());
  for (const Layer& l : layers_) out.push_back(l.spec);
  return out;
}

SplitNet SplitNet::WithSplitPoint(std::size_t split_point) const {
  return SplitNet(input_shape_, layers_, split_point, seed_);
}

std::vector<Tensor> ForwardTrace(std::span<const Layer> layers,
                                 const Tensor& x,
                                 std::size_t first_layer_index) {
  std::vector<Tensor> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(x);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& layer = layers[i];
    if (acts.back().size() != layer.in_size()) {
      throw ShapeError("layer " + std::to_string(first_layer_index + i) +
                       " expects " + std::to_string(layer.in_size()) +
                       " inputs, got " + std::to_string(acts.back().size()));
    }
    Tensor out(layer.out_shape);
    LayerForward(layer, acts.back().values(), out.values());
    if (!out.AllFinite()) {
      throw NumericError("non-finite activation after layer " +
                             std::to_string(first_layer_index + i),
                         first_layer_index + i);
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

Tensor ForwardBottom(const SplitNet& net, const Tensor& x) {
  CheckInput(x, net.input_shape(), "input");
  auto acts = ForwardTrace(net.bottom(), x, 0);
  return std::move(acts.back());
}

Tensor ForwardTop(const SplitNet& net, const Tensor& z) {
  if (z.size() != NumElements(net.smashed_shape())) {
    throw ShapeError("smashed data shape " + ShapeToString(z.shape()) +
                     " does not match " + ShapeToString(net.smashed_shape()));
  }
  if (net.top().empty()) return z;
  auto acts = ForwardTrace(net.top(), z, net.split_point());
  return std::move(acts.back());
}

Tensor ForwardFull(const SplitNet& net, const Tensor& x) {
  return ForwardTop(net, ForwardBottom(net, x));
}

namespace {

// Pushes one tangent through the bottom model given its forward trace.
void PushTangent(std::span<const Layer> layers,
                 const std::vector<Tensor>& acts, std::vector<double>& t,
                 std::vector<double>& scratch) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    scratch.assign(layers[l].out_size(), 0.0);
    LayerTangent(layers[l], acts[l].values(), acts[l + 1].values(), t,
                 scratch);
    for (double v : scratch) {
      if (!std::isfinite(v)) {
        throw NumericError("non-finite tangent after layer " +
                               std::to_string(l),
                           l);
      }
    }
    std::swap(t, scratch);
  }
}

}  // namespace

Jacobian InputJacobian(const SplitNet& net, const Tensor& x) {
  CheckInput(x, net.input_shape(), "input");
  const auto acts = ForwardTrace(net.bottom(), x, 0);
  const std::size_t d_x = x.size();
  const std::size_t d_z = acts.back().size();
  Jacobian jac(d_z, d_x);
  std::vector<double> t, scratch;
  for (std::size_t i = 0; i < d_x; ++i) {
    t.assign(d_x, 0.0);
    t[i] = 1.0;
    PushTangent(net.bottom(), acts, t, scratch);
    for (std::size_t k = 0; k < d_z; ++k) jac(k, i) = t[k];
  }
  return jac;
}

std::vector<double> JtjDiagonal(const SplitNet& net, const Tensor& x) {
  CheckInput(x, net.input_shape(), "input");
  const auto acts = ForwardTrace(net.bottom(), x, 0);
  const std::size_t d_x = x.size();
  std::vector<double> diag(d_x, 0.0);
  std::vector<double> t, scratch;
  for (std::size_t i = 0; i < d_x; ++i) {
    t.assign(d_x, 0.0);
    t[i] = 1.0;
    PushTangent(net.bottom(), acts, t, scratch);
    double sum = 0.0;
    for (double v : t) sum += v * v;
    diag[i] = sum;
  }
  return diag;
}

std::vector<double> JtjDiagonalAlong(const SplitNet& net, const Tensor& x,
                                     const Eigen::MatrixXd& directions) {
  CheckInput(x, net.input_shape(), "input");
  if (static_cast<std::size_t>(directions.rows()) != x.size()) {
    throw ShapeError("direction matrix has " +
                     std::to_string(directions.rows()) + " rows, input has " +
                     std::to_string(x.size()) + " coordinates");
  }
  const auto acts = ForwardTrace(net.bottom(), x, 0);
  std::vector<double> out(directions.cols(), 0.0);
  std::vector<double> t, scratch;
  for (Eigen::Index j = 0; j < directions.cols(); ++j) {
    t.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = directions(i, j);
    PushTangent(net.bottom(), acts, t, scratch);
    double sum = 0.0;
    for (double v : t) sum += v * v;
    out[j] = sum;
  }
  return out;
}

Tensor BottomVjp(const SplitNet& net, const Tensor& x, const Tensor& g) {
  CheckInput(x, net.input_shape(), "input");
  const auto layers = net.bottom();
  const auto acts = ForwardTrace(layers, x, 0);
  if (g.size() != acts.back().size()) {
    throw ShapeError("cotangent size does not match smashed data");
  }
  std::vector<double> grad(g.values().begin(), g.values().end());
  std::vector<double> scratch;
  for (std::size_t l = layers.size(); l-- > 0;) {
    scratch.assign(layers[l].in_size(), 0.0);
    LayerBackward(layers[l], acts[l].values(), acts[l + 1].values(), grad,
                  scratch, nullptr);
    std::swap(grad, scratch);
  }
  for (double v : grad) {
    if (!std::isfinite(v)) throw NumericError("non-finite input gradient", 0);
  }
  Tensor out(x.shape());
  std::copy(grad.begin(), grad.end(), out.values().begin());
  return out;
}

}  // namespace fsinfo
