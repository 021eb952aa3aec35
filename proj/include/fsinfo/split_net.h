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

#ifndef FSINFO_SPLIT_NET_H_
#define FSINFO_SPLIT_NET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fsinfo/layer.h"
#include "fsinfo/tensor.h"

namespace fsinfo {

// d_z x d_x matrix; entry (k, i) is dz_k / dx_i.
using Jacobian = Eigen::MatrixXd;

// Feedforward network cut after layer `split_point`. The bottom model is
// layers [0, p), the top model layers [p, L). p == L leaves the top empty.
class SplitNet {
 public:
  SplitNet(Shape input_shape, std::vector<Layer> layers,
           std::size_t split_point, std::uint64_t seed = 0);

  // Initializes parameters from `seed`.
  static SplitNet Build(const Shape& input_shape,
                        std::span<const LayerSpec> specs,
                        std::size_t split_point, std::uint64_t seed);

  const Shape& input_shape() const { return input_shape_; }
  std::size_t input_size() const { return NumElements(input_shape_); }
  const Shape& smashed_shape() const;
  const Shape& output_shape() const;

  std::size_t num_layers() const { return layers_.size(); }
  std::size_t split_point() const { return split_point_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const Layer> layers() const { return layers_; }
  std::span<const Layer> bottom() const;
  std::span<const Layer> top() const;
  std::vector<LayerSpec> specs() const;

  // Same parameters, different cut.
  SplitNet WithSplitPoint(std::size_t split_point) const;

  // Training access; the trainer owns the net exclusively while it runs.
  std::vector<Layer>& mutable_layers() { return layers_; }

 private:
  Shape input_shape_;
  std::vector<Layer> layers_;
  std::size_t split_point_;
  std::uint64_t seed_;
};

// Activations a_0 = x, a_1, ..., a_n for a contiguous layer range.
// `first_layer_index` only labels NumericError messages.
std::vector<Tensor> ForwardTrace(std::span<const Layer> layers,
                                 const Tensor& x,
                                 std::size_t first_layer_index = 0);

Tensor ForwardBottom(const SplitNet& net, const Tensor& x);
Tensor ForwardTop(const SplitNet& net, const Tensor& z);
Tensor ForwardFull(const SplitNet& net, const Tensor& x);

// Exact bottom-model Jacobian at x by forward-mode directional derivatives.
Jacobian InputJacobian(const SplitNet& net, const Tensor& x);

// diag(J^T J) at x, one directional derivative per input coordinate,
// without materializing J.
std::vector<double> JtjDiagonal(const SplitNet& net, const Tensor& x);

// Squared norms ||J d_j||^2 for each column d_j of `directions`
// (d_x rows). With the identity this is JtjDiagonal.
std::vector<double> JtjDiagonalAlong(const SplitNet& net, const Tensor& x,
                                     const Eigen::MatrixXd& directions);

// J^T g for the bottom model at x: the gradient of <g, f(x)> w.r.t. x.
Tensor BottomVjp(const SplitNet& net, const Tensor& x, const Tensor& g);

}  // namespace fsinfo

#endif  // FSINFO_SPLIT_NET_H_
