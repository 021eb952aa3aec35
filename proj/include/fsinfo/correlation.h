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

#ifndef FSINFO_CORRELATION_H_
#define FSINFO_CORRELATION_H_

#include <string>
#include <vector>

namespace fsinfo {

enum class CorrelationKind { kSpearman, kPearson };

CorrelationKind ParseCorrelationKind(const std::string& name);

// 1-based ranks; tied values share the average of their ranks.
std::vector<double> AverageRanks(const std::vector<double>& values);

// Pearson, or Pearson on average ranks for Spearman. Needs equal-length
// inputs with at least 3 points; throws ParameterError on zero variance.
double Correlation(const std::vector<double>& xs, const std::vector<double>& ys,
                   CorrelationKind kind);

}  // namespace fsinfo

#endif  // FSINFO_CORRELATION_H_
