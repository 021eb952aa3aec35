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

#include "fsinfo/data_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "fsinfo/errors.h"

namespace fsinfo {

void ValidateDataset(const LabeledDataset& ds) {
  if (ds.inputs.size() != ds.labels.size()) {
    throw ParameterError("dataset has " + std::to_string(ds.inputs.size()) +
                         " inputs but " + std::to_string(ds.labels.size()) +
                         " labels");
  }
  for (const Tensor& x : ds.inputs) {
    if (x.shape() != ds.input_shape) {
      throw ShapeError("sample shape " + ShapeToString(x.shape()) +
                       " differs from dataset shape " +
                       ShapeToString(ds.input_shape));
    }
  }
}

LabeledDataset Slice(const LabeledDataset& ds, std::size_t begin,
                     std::size_t end) {
  if (begin > end || end > ds.size()) {
    throw ParameterError("slice [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") outside dataset of size " +
                         std::to_string(ds.size()));
  }
  LabeledDataset out;
  out.input_shape = ds.input_shape;
  out.num_classes = ds.num_classes;
  out.meta = ds.meta;
  out.inputs.assign(ds.inputs.begin() + begin, ds.inputs.begin() + end);
  out.labels.assign(ds.labels.begin() + begin, ds.labels.begin() + end);
  return out;
}

Tensor MeanInput(const LabeledDataset& ds) {
  if (ds.empty()) throw ParameterError("mean of an empty dataset");
  Tensor mean(ds.input_shape);
  for (const Tensor& x : ds.inputs) {
    for (std::size_t i = 0; i < x.size(); ++i) mean[i] += x[i];
  }
  for (double& v : mean.values()) v /= static_cast<double>(ds.size());
  return mean;
}

namespace {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::uint32_t ReadBigEndian32(const std::string& bytes, std::size_t offset,
                              const char* what) {
  if (offset + 4 > bytes.size()) {
    throw FormatError(std::string(what) + ": truncated header", bytes.size());
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  }
  return v;
}

}  // namespace

LabeledDataset ParseIdx(const std::string& image_bytes,
                        const std::string& label_bytes) {
  constexpr std::uint32_t kImageMagic = 0x00000803;
  constexpr std::uint32_t kLabelMagic = 0x00000801;
  if (ReadBigEndian32(image_bytes, 0, "images") != kImageMagic) {
    throw FormatError("images: bad magic number", 0);
  }
  if (ReadBigEndian32(label_bytes, 0, "labels") != kLabelMagic) {
    throw FormatError("labels: bad magic number", 0);
  }
  const std::uint32_t n = ReadBigEndian32(image_bytes, 4, "images");
  const std::uint32_t rows = ReadBigEndian32(image_bytes, 8, "images");
  const std::uint32_t cols = ReadBigEndian32(image_bytes, 12, "images");
  const std::uint32_t n_labels = ReadBigEndian32(label_bytes, 4, "labels");
  if (n != n_labels) {
    throw FormatError("image count " + std::to_string(n) +
                          " differs from label count " +
                          std::to_string(n_labels),
                      4);
  }
  if (rows == 0 || cols == 0) throw FormatError("images: zero dimension", 8);
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  const std::size_t need_images = 16 + plane * n;
  if (image_bytes.size() < need_images) {
    throw FormatError("images: truncated pixel data (need " +
                          std::to_string(need_images) + " bytes)",
                      image_bytes.size());
  }
  if (label_bytes.size() < 8 + static_cast<std::size_t>(n)) {
    throw FormatError("labels: truncated label data", label_bytes.size());
  }
  LabeledDataset ds;
  ds.input_shape = {1, rows, cols};
  ds.meta.name = "idx";
  ds.meta.normalization = "pixel p in [0,255] -> 2p/255 - 1";
  ds.inputs.reserve(n);
  ds.labels.reserve(n);
  int max_label = -1;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> pixels(plane);
    for (std::size_t i = 0; i < plane; ++i) {
      const auto p = static_cast<unsigned char>(image_bytes[16 + s * plane + i]);
      pixels[i] = 2.0 * p / 255.0 - 1.0;
    }
    ds.inputs.emplace_back(ds.input_shape, std::move(pixels));
    const int label = static_cast<unsigned char>(label_bytes[8 + s]);
    ds.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  ds.num_classes = static_cast<std::size_t>(max_label + 1);
  return ds;
}

LabeledDataset LoadIdx(const std::string& images_path,
                       const std::string& labels_path) {
  return ParseIdx(ReadFile(images_path), ReadFile(labels_path));
}

namespace {

std::string TrimCell(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

// Splits one CSV line; commas inside double quotes are kept.
std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      cells.push_back(TrimCell(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(TrimCell(cell));
  return cells;
}

bool ParseNumber(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// Sorted distinct values: numerically when every value parses, else
// lexicographically.
std::vector<std::string> SortedCategories(const std::set<std::string>& values) {
  std::vector<std::string> out(values.begin(), values.end());
  bool numeric = true;
  for (const auto& v : out) {
    double unused;
    numeric = numeric && ParseNumber(v, unused);
  }
  if (numeric) {
    std::stable_sort(out.begin(), out.end(),
                     [](const std::string& a, const std::string& b) {
                       double x = 0, y = 0;
                       ParseNumber(a, x);
                       ParseNumber(b, y);
                       return x < y;
                     });
  }
  return out;
}

}  // namespace

LabeledDataset ParseCsvTabular(
    const std::string& text, const std::string& label_column,
    const std::vector<std::string>& onehot_columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("csv: missing header row", 1);
  const auto header = SplitCsvLine(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw ParameterError("csv: label column '" + label_column +
                         "' not in header");
  }
  const std::size_t label_index = label_it - header.begin();
  const std::set<std::string> onehot(onehot_columns.begin(),
                                     onehot_columns.end());
  for (const auto& name : onehot) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw ParameterError("csv: one-hot column '" + name + "' not in header");
    }
  }

  std::vector<std::vector<std::string>> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (TrimCell(line).empty()) continue;
    auto cells = SplitCsvLine(line);
    if (cells.size() != header.size()) {
      throw FormatError("csv: row has " + std::to_string(cells.size()) +
                            " fields, header has " +
                            std::to_string(header.size()),
                        row_number, 0);
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw FormatError("csv: no data rows", row_number);

  LabeledDataset ds;
  ds.meta.name = "csv";
  ds.meta.normalization =
      "continuous min-max -> [-1,1]; categorical one-hot {0, 1}";
  std::vector<std::vector<double>> numeric(header.size());
  std::size_t n_features = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_index) continue;
    ColumnNormalization col;
    col.name = header[c];
    col.first_feature = n_features;
    if (onehot.count(header[c]) > 0) {
      std::set<std::string> values;
      for (const auto& r : rows) values.insert(r[c]);
      col.kind = ColumnNormalization::Kind::kOneHot;
      col.categories = SortedCategories(values);
      n_features += col.categories.size();
    } else {
      col.kind = ColumnNormalization::Kind::kContinuous;
      numeric[c].resize(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!ParseNumber(rows[r][c], numeric[c][r])) {
          throw FormatError("csv: cannot parse '" + rows[r][c] +
                                "' as a number in column '" + header[c] + "'",
                            r + 2, c + 1);
        }
      }
      const auto [lo, hi] =
          std::minmax_element(numeric[c].begin(), numeric[c].end());
      col.min = *lo;
      col.max = *hi;
      n_features += 1;
    }
    ds.meta.columns.push_back(std::move(col));
  }
  if (n_features == 0) throw ParameterError("csv: no feature columns");

  std::set<std::string> label_values;
  for (const auto& r : rows) label_values.insert(r[label_index]);
  const auto classes = SortedCategories(label_values);
  std::map<std::string, int> class_index;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    class_index[classes[i]] = static_cast<int>(i);
  }
  ds.num_classes = classes.size();
  ds.input_shape = {n_features};

  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<double> features(n_features, 0.0);
    std::size_t col_i = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_index) continue;
      const ColumnNormalization& col = ds.meta.columns[col_i++];
      if (col.kind == ColumnNormalization::Kind::kOneHot) {
        for (std::size_t k = 0; k < col.categories.size(); ++k) {
          features[col.first_feature + k] =
              col.categories[k] == rows[r][c] ? 1.0 : 0.0;
        }
      } else {
        const double span = col.max - col.min;
        features[col.first_feature] =
            span > 0.0 ? 2.0 * (numeric[c][r] - col.min) / span - 1.0 : 0.0;
      }
    }
    ds.inputs.emplace_back(ds.input_shape, std::move(features));
    ds.labels.push_back(class_index.at(rows[r][label_index]));
  }
  return ds;
}

LabeledDataset LoadCsvTabular(const std::string& path,
                              const std::string& label_column,
                              const std::vector<std::string>& onehot_columns) {
  return ParseCsvTabular(ReadFile(path), label_column, onehot_columns);
}

std::vector<double> DenormalizeContinuous(const DatasetMeta& meta,
                                          const Tensor& x) {
  std::vector<double> out;
  for (const auto& col : meta.columns) {
    if (col.kind != ColumnNormalization::Kind::kContinuous) continue;
    if (col.first_feature >= x.size()) {
      throw ShapeError("sample is shorter than the normalization record");
    }
    out.push_back(col.min +
                  (x[col.first_feature] + 1.0) * 0.5 * (col.max - col.min));
  }
  return out;
}

LabeledDataset DownsampleImages(const LabeledDataset& ds, std::size_t factor) {
  const Shape& s = ds.input_shape;
  if (s.size() != 3) {
    throw ParameterError("downsampling needs [C,H,W] images, got " +
                         ShapeToString(s));
  }
  if (factor == 0 || s[1] % factor != 0 || s[2] % factor != 0) {
    throw ParameterError("factor " + std::to_string(factor) +
                         " does not divide " + ShapeToString(s));
  }
  if (factor == 1) return ds;
  const std::size_t c_n = s[0], h = s[1], w = s[2];
  const std::size_t oh = h / factor, ow = w / factor;
  LabeledDataset out = ds;
  out.input_shape = {c_n, oh, ow};
  const double scale = 1.0 / static_cast<double>(factor * factor);
  for (std::size_t n = 0; n < ds.size(); ++n) {
    const Tensor& x = ds.inputs[n];
    Tensor y(out.input_shape);
    for (std::size_t c = 0; c < c_n; ++c) {
      for (std::size_t yy = 0; yy < h; ++yy) {
        for (std::size_t xx = 0; xx < w; ++xx) {
          y[(c * oh + yy / factor) * ow + xx / factor] +=
              x[(c * h + yy) * w + xx] * scale;
        }
      }
    }
    out.inputs[n] = std::move(y);
  }
  out.meta.normalization += "; avgpool x" + std::to_string(factor);
  return out;
}

SynthKind ParseSynthKind(const std::string& name) {
  if (name == "bimodal_digits") return SynthKind::kBimodalDigits;
  if (name == "spread_rgb") return SynthKind::kSpreadRgb;
  if (name == "gaussian_tabular") return SynthKind::kGaussianTabular;
  throw ParameterError("unknown synthetic dataset '" + name + "'");
}

std::string SynthKindName(SynthKind kind) {
  switch (kind) {
    case SynthKind::kBimodalDigits:
      return "bimodal_digits";
    case SynthKind::kSpreadRgb:
      return "spread_rgb";
    case SynthKind::kGaussianTabular:
      return "gaussian_tabular";
  }
  return "?";
}

namespace {

constexpr std::size_t kSide = 8;
constexpr std::size_t kDigitClasses = 10;

// Ten +/-1 templates: box-smoothed Gaussian fields thresholded at their
// median, so each template is a blob-like stroke pattern with half the
// pixels on.
std::vector<std::vector<double>> DigitTemplates(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> templates;
  for (std::size_t c = 0; c < kDigitClasses; ++c) {
    std::vector<double> field(kSide * kSide);
    for (double& v : field) v = normal(rng);
    std::vector<double> smooth(kSide * kSide, 0.0);
    for (std::size_t y = 0; y < kSide; ++y) {
      for (std::size_t x = 0; x < kSide; ++x) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const long yy = static_cast<long>(y) + dy;
            const long xx = static_cast<long>(x) + dx;
            if (yy < 0 || xx < 0 || yy >= static_cast<long>(kSide) ||
                xx >= static_cast<long>(kSide)) {
              continue;
            }
            smooth[y * kSide + x] += field[yy * kSide + xx];
          }
        }
      }
    }
    std::vector<double> sorted = smooth;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::vector<double> t(kSide * kSide);
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = smooth[i] > median ? 1.0 : -1.0;
    }
    templates.push_back(std::move(t));
  }
  return templates;
}

int ArgMaxScore(const std::vector<std::vector<double>>& weights,
                const std::vector<double>& x) {
  int best = 0;
  double best_score = -1e300;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += weights[c][i] * x[i];
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

LabeledDataset SynthGenerate(SynthKind kind, std::size_t n,
                             std::uint64_t seed) {
  if (n < 1) throw ParameterError("synthetic dataset needs n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  LabeledDataset ds;
  ds.meta.name = SynthKindName(kind);
  ds.meta.normalization = "synthetic, generated in [-1,1]";
  ds.inputs.reserve(n);
  ds.labels.reserve(n);

  switch (kind) {
    case SynthKind::kBimodalDigits: {
      ds.input_shape = {1, kSide, kSide};
      ds.num_classes = kDigitClasses;
      const auto templates = DigitTemplates(rng);
      std::uniform_int_distribution<std::size_t> pick_class(
          0, kDigitClasses - 1);
      std::bernoulli_distribution flip(0.08);
      std::normal_distribution<double> jitter(0.0, 0.05);
      for (std::size_t s = 0; s < n; ++s) {
        const auto& t = templates[pick_class(rng)];
        std::vector<double> x(t.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double base = flip(rng) ? -t[i] : t[i];
          x[i] = std::clamp(base + jitter(rng), -1.0, 1.0);
        }
        ds.labels.push_back(ArgMaxScore(templates, x));
        ds.inputs.emplace_back(ds.input_shape, std::move(x));
      }
      break;
    }
    case SynthKind::kSpreadRgb: {
      ds.input_shape = {3, kSide, kSide};
      ds.num_classes = 10;
      const std::size_t d = 3 * kSide * kSide;
      std::vector<std::vector<double>> weights(ds.num_classes,
                                               std::vector<double>(d));
      for (auto& row : weights) {
        for (double& w : row) w = normal(rng);
      }
      for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> x(d);
        for (double& v : x) v = uniform(rng);
        ds.labels.push_back(ArgMaxScore(weights, x));
        ds.inputs.emplace_back(ds.input_shape, std::move(x));
      }
      break;
    }
    case SynthKind::kGaussianTabular: {
      constexpr std::size_t d = 16;
      ds.input_shape = {d};
      ds.num_classes = 2;
      std::vector<double> w(d);
      for (double& v : w) v = normal(rng);
      for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> x(d);
        double score = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          x[i] = std::clamp(0.4 * normal(rng), -1.0, 1.0);
          score += w[i] * x[i];
        }
        ds.labels.push_back(score > 0.0 ? 1 : 0);
        ds.inputs.emplace_back(ds.input_shape, std::move(x));
      }
      break;
    }
  }
  return ds;
}

}  // namespace fsinfo
