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

#include "fsinfo/layer.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <utility>

#include "fsinfo/errors.h"

namespace fsinfo {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    parts.push_back(Trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::size_t ParsePositive(std::string_view token, std::string_view context) {
  std::size_t value = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value == 0) {
    throw ParameterError("expected a positive integer in layer spec '" +
                         std::string(context) + "'");
  }
  return value;
}

LayerSpec ParseOne(std::string_view text) {
  auto fields = Split(text, ':');
  std::string_view name = fields[0];
  LayerSpec spec;
  auto expect_fields = [&](std::size_t n) {
    if (fields.size() != n) {
      throw ParameterError("layer spec '" + std::string(text) + "' expects " +
                           std::to_string(n - 1) + " argument(s)");
    }
  };
  if (name == "dense") {
    expect_fields(2);
    spec.kind = LayerKind::kDense;
    spec.units = ParsePositive(fields[1], text);
  } else if (name == "relu") {
    expect_fields(1);
    spec.kind = LayerKind::kRelu;
  } else if (name == "tanh") {
    expect_fields(1);
    spec.kind = LayerKind::kTanh;
  } else if (name == "flatten") {
    expect_fields(1);
    spec.kind = LayerKind::kFlatten;
  } else if (name == "avgpool2d") {
    expect_fields(2);
    spec.kind = LayerKind::kAvgPool2d;
    spec.kernel = ParsePositive(fields[1], text);
  } else if (name == "conv2d") {
    if (fields.size() != 3 && fields.size() != 4) {
      throw ParameterError("conv2d spec is conv2d:<channels>:<kernel>[:same|valid]");
    }
    spec.kind = LayerKind::kConv2d;
    spec.units = ParsePositive(fields[1], text);
    spec.kernel = ParsePositive(fields[2], text);
    spec.padding = Padding::kSame;
    if (fields.size() == 4) {
      if (fields[3] == "same") {
        spec.padding = Padding::kSame;
      } else if (fields[3] == "valid") {
        spec.padding = Padding::kValid;
      } else {
        throw ParameterError("unknown conv2d padding '" +
                             std::string(fields[3]) + "'");
      }
    }
  } else {
    throw ParameterError("unknown layer kind '" + std::string(name) + "'");
  }
  return spec;
}

void ExpectImage(const LayerSpec& spec, const Shape& in) {
  if (in.size() != 3) {
    throw ShapeError(LayerSpecToString(spec) +
                     " expects a [channels, height, width] input, got " +
                     ShapeToString(in));
  }
}

std::size_t ConvPad(const Layer& l) {
  return l.spec.padding == Padding::kSame ? l.spec.kernel / 2 : 0;
}

// Linear part of dense/conv/pool layers; bias added when `with_bias`.
void ApplyLinear(const Layer& l, std::span<const double> in,
                 std::span<double> out, bool with_bias) {
  switch (l.spec.kind) {
    case LayerKind::kDense: {
      const std::size_t n_in = l.in_size();
      const std::size_t n_out = l.out_size();
      for (std::size_t o = 0; o < n_out; ++o) {
        const double* w = &l.weight[o * n_in];
        double acc = with_bias ? l.bias[o] : 0.0;
        for (std::size_t i = 0; i < n_in; ++i) acc += w[i] * in[i];
        out[o] = acc;
      }
      return;
    }
    case LayerKind::kConv2d: {
      const std::size_t ic_n = l.in_shape[0], ih = l.in_shape[1],
                        iw = l.in_shape[2];
      const std::size_t oc_n = l.out_shape[0], oh = l.out_shape[1],
                        ow = l.out_shape[2];
      const std::size_t k = l.spec.kernel;
      const long pad = static_cast<long>(ConvPad(l));
      for (std::size_t oc = 0; oc < oc_n; ++oc) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t x = 0; x < ow; ++x) {
            double acc = with_bias ? l.bias[oc] : 0.0;
            for (std::size_t ic = 0; ic < ic_n; ++ic) {
              for (std::size_t ky = 0; ky < k; ++ky) {
                long sy = static_cast<long>(y + ky) - pad;
                if (sy < 0 || sy >= static_cast<long>(ih)) continue;
                for (std::size_t kx = 0; kx < k; ++kx) {
                  long sx = static_cast<long>(x + kx) - pad;
                  if (sx < 0 || sx >= static_cast<long>(iw)) continue;
                  acc += l.weight[((oc * ic_n + ic) * k + ky) * k + kx] *
                         in[(ic * ih + sy) * iw + sx];
                }
              }
            }
            out[(oc * oh + y) * ow + x] = acc;
          }
        }
      }
      return;
    }
    case LayerKind::kAvgPool2d: {
      const std::size_t c_n = l.in_shape[0], ih = l.in_shape[1],
                        iw = l.in_shape[2];
      const std::size_t oh = l.out_shape[1], ow = l.out_shape[2];
      const std::size_t k = l.spec.kernel;
      const double scale = 1.0 / static_cast<double>(k * k);
      for (std::size_t c = 0; c < c_n; ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t ky = 0; ky < k; ++ky) {
              for (std::size_t kx = 0; kx < k; ++kx) {
                acc += in[(c * ih + y * k + ky) * iw + x * k + kx];
              }
            }
            out[(c * oh + y) * ow + x] = acc * scale;
          }
        }
      }
      return;
    }
    case LayerKind::kFlatten:
      std::copy(in.begin(), in.end(), out.begin());
      return;
    default:
      throw ParameterError("ApplyLinear called on a nonlinear layer");
  }
}

// Transpose of ApplyLinear's linear part. Accumulates into g_in.
void ApplyLinearTranspose(const Layer& l, std::span<const double> g_out,
                          std::span<double> g_in) {
  switch (l.spec.kind) {
    case LayerKind::kDense: {
      const std::size_t n_in = l.in_size();
      const std::size_t n_out = l.out_size();
      for (std::size_t o = 0; o < n_out; ++o) {
        const double* w = &l.weight[o * n_in];
        const double g = g_out[o];
        for (std::size_t i = 0; i < n_in; ++i) g_in[i] += w[i] * g;
      }
      return;
    }
    case LayerKind::kConv2d: {
      const std::size_t ic_n = l.in_shape[0], ih = l.in_shape[1],
                        iw = l.in_shape[2];
      const std::size_t oc_n = l.out_shape[0], oh = l.out_shape[1],
                        ow = l.out_shape[2];
      const std::size_t k = l.spec.kernel;
      const long pad = static_cast<long>(ConvPad(l));
      for (std::size_t oc = 0; oc < oc_n; ++oc) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t x = 0; x < ow; ++x) {
            const double g = g_out[(oc * oh + y) * ow + x];
            for (std::size_t ic = 0; ic < ic_n; ++ic) {
              for (std::size_t ky = 0; ky < k; ++ky) {
                long sy = static_cast<long>(y + ky) - pad;
                if (sy < 0 || sy >= static_cast<long>(ih)) continue;
                for (std::size_t kx = 0; kx < k; ++kx) {
                  long sx = static_cast<long>(x + kx) - pad;
                  if (sx < 0 || sx >= static_cast<long>(iw)) continue;
                  g_in[(ic * ih + sy) * iw + sx] +=
                      l.weight[((oc * ic_n + ic) * k + ky) * k + kx] * g;
                }
              }
            }
          }
        }
      }
      return;
    }
    case LayerKind::kAvgPool2d: {
      const std::size_t c_n = l.in_shape[0], ih = l.in_shape[1],
                        iw = l.in_shape[2];
      const std::size_t oh = l.out_shape[1], ow = l.out_shape[2];
      const std::size_t k = l.spec.kernel;
      const double scale = 1.0 / static_cast<double>(k * k);
      for (std::size_t c = 0; c < c_n; ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t x = 0; x < ow; ++x) {
            const double g = g_out[(c * oh + y) * ow + x] * scale;
            for (std::size_t ky = 0; ky < k; ++ky) {
              for (std::size_t kx = 0; kx < k; ++kx) {
                g_in[(c * ih + y * k + ky) * iw + x * k + kx] += g;
              }
            }
          }
        }
      }
      return;
    }
    case LayerKind::kFlatten:
      for (std::size_t i = 0; i < g_out.size(); ++i) g_in[i] += g_out[i];
      return;
    default:
      throw ParameterError("ApplyLinearTranspose called on a nonlinear layer");
  }
}

void AccumulateParamGrads(const Layer& l, std::span<const double> in,
                          std::span<const double> g_out, LayerGrads& grads) {
  if (l.spec.kind == LayerKind::kDense) {
    const std::size_t n_in = l.in_size();
    const std::size_t n_out = l.out_size();
    for (std::size_t o = 0; o < n_out; ++o) {
      const double g = g_out[o];
      grads.bias[o] += g;
      double* gw = &grads.weight[o * n_in];
      for (std::size_t i = 0; i < n_in; ++i) gw[i] += g * in[i];
    }
    return;
  }
  // conv2d
  const std::size_t ic_n = l.in_shape[0], ih = l.in_shape[1],
                    iw = l.in_shape[2];
  const std::size_t oc_n = l.out_shape[0], oh = l.out_shape[1],
                    ow = l.out_shape[2];
  const std::size_t k = l.spec.kernel;
  const long pad = static_cast<long>(ConvPad(l));
  for (std::size_t oc = 0; oc < oc_n; ++oc) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const double g = g_out[(oc * oh + y) * ow + x];
        grads.bias[oc] += g;
        for (std::size_t ic = 0; ic < ic_n; ++ic) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            long sy = static_cast<long>(y + ky) - pad;
            if (sy < 0 || sy >= static_cast<long>(ih)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              long sx = static_cast<long>(x + kx) - pad;
              if (sx < 0 || sx >= static_cast<long>(iw)) continue;
              grads.weight[((oc * ic_n + ic) * k + ky) * k + kx] +=
                  g * in[(ic * ih + sy) * iw + sx];
            }
          }
        }
      }
    }
  }
}

}  // namespace

std::string LayerSpecToString(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::kDense:
      return "dense:" + std::to_string(spec.units);
    case LayerKind::kRelu:
      return "relu";
    case LayerKind::kTanh:
      return "tanh";
    case LayerKind::kFlatten:
      return "flatten";
    case LayerKind::kAvgPool2d:
      return "avgpool2d:" + std::to_string(spec.kernel);
    case LayerKind::kConv2d:
      return "conv2d:" + std::to_string(spec.units) + ":" +
             std::to_string(spec.kernel) + ":" +
             (spec.padding == Padding::kSame ? "same" : "valid");
  }
  return "?";
}

std::vector<LayerSpec> ParseLayerSpecs(std::string_view text) {
  std::vector<LayerSpec> specs;
  for (std::string_view token : Split(text, ',')) {
    if (token.empty()) throw ParameterError("empty entry in layer list");
    specs.push_back(ParseOne(token));
  }
  return specs;
}

std::string LayerSpecsToString(std::span<const LayerSpec> specs) {
  std::string out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i > 0) out += ", ";
    out += LayerSpecToString(specs[i]);
  }
  return out;
}

Shape OutputShape(const LayerSpec& spec, const Shape& in) {
  if (in.empty() || NumElements(in) == 0) {
    throw ShapeError("layer input shape is empty");
  }
  switch (spec.kind) {
    case LayerKind::kDense:
      if (spec.units == 0) throw ParameterError("dense needs units > 0");
      return {spec.units};
    case LayerKind::kRelu:
    case LayerKind::kTanh:
      return in;
    case LayerKind::kFlatten:
      return {NumElements(in)};
    case LayerKind::kAvgPool2d: {
      ExpectImage(spec, in);
      const std::size_t k = spec.kernel;
      if (k == 0 || in[1] % k != 0 || in[2] % k != 0) {
        throw ParameterError("avgpool2d kernel " + std::to_string(k) +
                             " must divide spatial dims of " +
                             ShapeToString(in));
      }
      return {in[0], in[1] / k, in[2] / k};
    }
    case LayerKind::kConv2d: {
      ExpectImage(spec, in);
      const std::size_t k = spec.kernel;
      if (spec.units == 0 || k == 0) {
        throw ParameterError("conv2d needs channels and kernel > 0");
      }
      if (spec.padding == Padding::kSame) {
        if (k % 2 == 0) {
          throw ParameterError("conv2d 'same' padding needs an odd kernel");
        }
        return {spec.units, in[1], in[2]};
      }
      if (k > in[1] || k > in[2]) {
        throw ShapeError("conv2d kernel larger than input " +
                         ShapeToString(in));
      }
      return {spec.units, in[1] - k + 1, in[2] - k + 1};
    }
  }
  throw ParameterError("unknown layer kind");
}

Layer MakeLayer(const LayerSpec& spec, const Shape& in_shape,
                std::mt19937_64& rng) {
  Layer layer;
  layer.spec = spec;
  layer.in_shape = in_shape;
  layer.out_shape = OutputShape(spec, in_shape);
  std::size_t fan_in = 0;
  std::size_t n_weight = 0;
  std::size_t n_bias = 0;
  if (spec.kind == LayerKind::kDense) {
    fan_in = layer.in_size();
    n_weight = fan_in * spec.units;
    n_bias = spec.units;
  } else if (spec.kind == LayerKind::kConv2d) {
    fan_in = in_shape[0] * spec.kernel * spec.kernel;
    n_weight = spec.units * fan_in;
    n_bias = spec.units;
  }
  if (n_weight > 0) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.weight.resize(n_weight);
    for (double& w : layer.weight) w = dist(rng);
    layer.bias.resize(n_bias);
    for (double& b : layer.bias) b = dist(rng);
  }
  return layer;
}

Layer MakeDense(std::size_t in, std::size_t out, std::vector<double> weight,
                std::vector<double> bias) {
  if (weight.size() != in * out || bias.size() != out) {
    throw ShapeError("dense parameters do not match " + std::to_string(out) +
                     "x" + std::to_string(in));
  }
  Layer layer;
  layer.spec.kind = LayerKind::kDense;
  layer.spec.units = out;
  layer.in_shape = {in};
  layer.out_shape = {out};
  layer.weight = std::move(weight);
  layer.bias = std::move(bias);
  return layer;
}

LayerGrads ZeroGrads(const Layer& layer) {
  return {std::vector<double>(layer.weight.size(), 0.0),
          std::vector<double>(layer.bias.size(), 0.0)};
}

void LayerForward(const Layer& layer, std::span<const double> in,
                  std::span<double> out) {
  switch (layer.spec.kind) {
    case LayerKind::kRelu:
      for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = in[i] > 0.0 ? in[i] : 0.0;
      }
      return;
    case LayerKind::kTanh:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
      return;
    default:
      ApplyLinear(layer, in, out, /*with_bias=*/true);
  }
}

void LayerTangent(const Layer& layer, std::span<const double> in,
                  std::span<const double> out, std::span<const double> t_in,
                  std::span<double> t_out) {
  switch (layer.spec.kind) {
    case LayerKind::kRelu:
      for (std::size_t i = 0; i < in.size(); ++i) {
        t_out[i] = in[i] > 0.0 ? t_in[i] : 0.0;
      }
      return;
    case LayerKind::kTanh:
      for (std::size_t i = 0; i < in.size(); ++i) {
        t_out[i] = (1.0 - out[i] * out[i]) * t_in[i];
      }
      return;
    default:
      ApplyLinear(layer, t_in, t_out, /*with_bias=*/false);
  }
}

void LayerBackward(const Layer& layer, std::span<const double> in,
                   std::span<const double> out,
                   std::span<const double> g_out, std::span<double> g_in,
                   LayerGrads* grads) {
  switch (layer.spec.kind) {
    case LayerKind::kRelu:
      for (std::size_t i = 0; i < in.size(); ++i) {
        g_in[i] = in[i] > 0.0 ? g_out[i] : 0.0;
      }
      return;
    case LayerKind::kTanh:
      for (std::size_t i = 0; i < in.size(); ++i) {
        g_in[i] = (1.0 - out[i] * out[i]) * g_out[i];
      }
      return;
    default:
      std::fill(g_in.begin(), g_in.end(), 0.0);
      ApplyLinearTranspose(layer, g_out, g_in);
      if (grads != nullptr && layer.HasParameters()) {
        AccumulateParamGrads(layer, in, g_out, *grads);
      }
  }
}

}  // namespace fsinfo
