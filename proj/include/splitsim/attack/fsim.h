// Copyright 2026 The splitsim Authors
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

#ifndef SPLITSIM_ATTACK_FSIM_H_
#define SPLITSIM_ATTACK_FSIM_H_

#include <cstddef>
#include <vector>

#include "splitsim/nn/tensor.h"

namespace splitsim::attack {

// Grayscale image, row-major.
struct GrayImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;
};

// Accepts [H,W], [C,H,W] or [1,C,H,W]. Three channels use Rec.601 luma
// weights; any other channel count is averaged.
GrayImage Luminance(const nn::Tensor& image);

struct FsimParams {
  int scales = 2;
  int orientations = 4;
  double min_wavelength = 6.0;
  double mult = 2.0;
  double sigma_on_f = 0.55;
  double d_theta_on_sigma = 1.2;
  double noise_k = 2.0;
  double t1 = 0.85;
  double t2 = 160.0 / (255.0 * 255.0);  // 160 on the 0..255 scale
};

// Phase congruency map from a log-Gabor filter bank (Kovesi's formulation
// with automatic noise-threshold estimation).
std::vector<double> PhaseCongruency(const GrayImage& img,
                                    const FsimParams& params = {});
// Scharr gradient magnitude with zero padding.
std::vector<double> GradientMagnitude(const GrayImage& img);

// Feature similarity index in [0,1] for images with values in [0,1].
// Symmetric, and exactly 1 for identical inputs. Throws ArgumentError on
// shape mismatch.
double Fsim(const nn::Tensor& a, const nn::Tensor& b,
            const FsimParams& params = {});
double Fsim(const GrayImage& a, const GrayImage& b,
            const FsimParams& params = {});

}  // namespace splitsim::attack

#endif  // SPLITSIM_ATTACK_FSIM_H_
