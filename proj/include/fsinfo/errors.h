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

#ifndef FSINFO_ERRORS_H_
#define FSINFO_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fsinfo {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument: out-of-range scalar, empty dataset, bad spec.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Tensor or layer shapes do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A non-finite value appeared while evaluating a network.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t layer_index)
      : Error(what), layer_index_(layer_index) {}
  std::size_t layer_index() const { return layer_index_; }

 private:
  std::size_t layer_index_;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// Malformed input file. `offset` is a byte offset for binary formats and a
// 1-based row number for text formats (column is 0 when not applicable).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset,
              std::size_t column = 0)
      : Error(what), offset_(offset), column_(column) {}
  std::size_t offset() const { return offset_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t offset_;
  std::size_t column_;
};

// Input at which a closed-form calibration is undefined (e.g. J == 0).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public Error {
 public:
  using Error::Error;
};

class AttackDivergedError : public Error {
 public:
  using Error::Error;
};

}  // namespace fsinfo

#endif  // FSINFO_ERRORS_H_
