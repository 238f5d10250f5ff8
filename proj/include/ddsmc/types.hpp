// Copyright 2026 The ddsmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

namespace ddsmc {

template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec2 = Vector2<double>;
using Mat2 = Matrix2<double>;

// Colour histograms are 10 bins over a 7x7 patch.
inline constexpr int kColourBins = 10;
inline constexpr int kPatchTrials = 49;

using ColourCounts = Eigen::Matrix<int, kColourBins, 1>;
using ColourVec = Eigen::Matrix<double, kColourBins, 1>;

inline constexpr int kNearestClusters = 3;
inline constexpr int kProposalOutputs = 5;
inline constexpr int kFeatureSize = kNearestClusters * (kColourBins + 1) + kColourBins;

using FeatureVector = Eigen::Matrix<double, kFeatureSize, 1>;
using Vec5 = Eigen::Matrix<double, kProposalOutputs, 1>;

} // namespace ddsmc
