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

#include "splitsim/attack/fsim.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "splitsim/errors.h"

namespace splitsim::attack {

namespace {

using Complex = std::complex<double>;

// In-place 2-D DFT by rows then columns. Images here are at most a few
// dozen pixels on a side, so the direct O(n^3) transform is plenty.
void Dft2(std::vector<Complex>& data, std::size_t rows, std::size_t cols,
          bool inverse) {
  double sign = inverse ? 1.0 : -1.0;
  auto transform = [sign](std::vector<Complex>& line) {
    std::size_t n = line.size();
    std::vector<Complex> out(n);
    for (std::size_t k = 0; k < n; ++k) {
      Complex acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        double angle = sign * 2.0 * std::numbers::pi *
                       static_cast<double>((k * t) % n) / static_cast<double>(n);
        acc += line[t] * Complex(std::cos(angle), std::sin(angle));
      }
      out[k] = acc;
    }
    line.swap(out);
  };
  std::vector<Complex> line(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(data.begin() + static_cast<long>(r * cols), cols, line.begin());
    transform(line);
    std::copy(line.begin(), line.end(), data.begin() + static_cast<long>(r * cols));
  }
  line.resize(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) line[r] = data[r * cols + c];
    transform(line);
    for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] = line[r];
  }
  if (inverse) {
    double scale = 1.0 / static_cast<double>(rows * cols);
    for (Complex& v : data) v *= scale;
  }
}

// Normalized frequency of DFT bin i (already in unshifted order).
double Frequency(std::size_t i, std::size_t n) {
  std::size_t half = n / 2;
  std::size_t shifted = (i + half) % n;
  if (n % 2 == 1) {
    return (static_cast<double>(shifted) - static_cast<double>(half)) /
           static_cast<double>(n - 1);
  }
  return (static_cast<double>(shifted) - static_cast<double>(half)) /
         static_cast<double>(n);
}

double Median(std::vector<double> v) {
  std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<long>(n / 2), v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(n / 2));
  return 0.5 * (lo + hi);
}

}  // namespace

GrayImage Luminance(const nn::Tensor& image) {
  const nn::Shape& s = image.shape();
  std::size_t channels = 1, rows = 0, cols = 0;
  if (s.size() == 2) {
    rows = s[0];
    cols = s[1];
  } else if (s.size() == 3) {
    channels = s[0];
    rows = s[1];
    cols = s[2];
  } else if (s.size() == 4 && s[0] == 1) {
    channels = s[1];
    rows = s[2];
    cols = s[3];
  } else {
    throw ArgumentError("fsim expects an image tensor, got " +
                        nn::ShapeString(s));
  }
  GrayImage g{rows, cols, std::vector<double>(rows * cols, 0.0)};
  std::size_t plane = rows * cols;
  if (channels == 3) {
    const double w[3] = {0.299, 0.587, 0.114};
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < plane; ++i) {
        g.pixels[i] += w[c] * image[c * plane + i];
      }
    }
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t i = 0; i < plane; ++i) g.pixels[i] += image[c * plane + i];
    }
    for (double& v : g.pixels) v /= static_cast<double>(channels);
  }
  return g;
}

std::vector<double> PhaseCongruency(const GrayImage& img,
                                    const FsimParams& params) {
  const std::size_t rows = img.rows, cols = img.cols, n = rows * cols;
  const int nscale = params.scales, norient = params.orientations;
  const double epsilon = 1e-4;
  const double theta_sigma =
      std::numbers::pi / norient / params.d_theta_on_sigma;

  std::vector<Complex> image_fft(img.pixels.begin(), img.pixels.end());
  Dft2(image_fft, rows, cols, false);

  std::vector<double> radius(n), sin_t(n), cos_t(n), lowpass(n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double x = Frequency(c, cols), y = Frequency(r, rows);
      std::size_t i = r * cols + c;
      radius[i] = std::sqrt(x * x + y * y);
      double theta = std::atan2(-y, x);
      sin_t[i] = std::sin(theta);
      cos_t[i] = std::cos(theta);
      lowpass[i] = 1.0 / (1.0 + std::pow(radius[i] / 0.45, 2 * 15));
    }
  }
  radius[0] = 1.0;

  std::vector<std::vector<double>> log_gabor(static_cast<std::size_t>(nscale));
  double log_sigma2 = 2.0 * std::pow(std::log(params.sigma_on_f), 2);
  for (int s = 0; s < nscale; ++s) {
    double fo = 1.0 / (params.min_wavelength * std::pow(params.mult, s));
    auto& lg = log_gabor[static_cast<std::size_t>(s)];
    lg.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double l = std::log(radius[i] / fo);
      lg[i] = std::exp(-(l * l) / log_sigma2) * lowpass[i];
    }
    lg[0] = 0.0;
  }

  std::vector<double> energy_all(n, 0.0), an_all(n, 0.0);
  std::vector<std::vector<Complex>> eo(static_cast<std::size_t>(nscale));
  std::vector<std::vector<double>> ifft_filters(static_cast<std::size_t>(nscale));
  for (int o = 0; o < norient; ++o) {
    double angle = o * std::numbers::pi / norient;
    std::vector<double> spread(n);
    for (std::size_t i = 0; i < n; ++i) {
      double ds = sin_t[i] * std::cos(angle) - cos_t[i] * std::sin(angle);
      double dc = cos_t[i] * std::cos(angle) + sin_t[i] * std::sin(angle);
      double dtheta = std::fabs(std::atan2(ds, dc));
      spread[i] = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
    }
    std::vector<double> sum_e(n, 0.0), sum_o(n, 0.0), sum_an(n, 0.0);
    double em_n = 0.0;
    for (int s = 0; s < nscale; ++s) {
      std::size_t su = static_cast<std::size_t>(s);
      std::vector<double> filter(n);
      for (std::size_t i = 0; i < n; ++i) filter[i] = log_gabor[su][i] * spread[i];
      if (s == 0) {
        for (double f : filter) em_n += f * f;
      }
      std::vector<Complex> f_spatial(filter.begin(), filter.end());
      Dft2(f_spatial, rows, cols, true);
      ifft_filters[su].resize(n);
      double root = std::sqrt(static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) {
        ifft_filters[su][i] = f_spatial[i].real() * root;
      }
      eo[su].resize(n);
      for (std::size_t i = 0; i < n; ++i) eo[su][i] = image_fft[i] * filter[i];
      Dft2(eo[su], rows, cols, true);
      for (std::size_t i = 0; i < n; ++i) {
        sum_an[i] += std::abs(eo[su][i]);
        sum_e[i] += eo[su][i].real();
        sum_o[i] += eo[su][i].imag();
      }
    }
    std::vector<double> energy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double x_energy = std::sqrt(sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]) + epsilon;
      double mean_e = sum_e[i] / x_energy;
      double mean_o = sum_o[i] / x_energy;
      for (int s = 0; s < nscale; ++s) {
        double e = eo[static_cast<std::size_t>(s)][i].real();
        double od = eo[static_cast<std::size_t>(s)][i].imag();
        energy[i] += e * mean_e + od * mean_o - std::fabs(e * mean_o - od * mean_e);
      }
    }

    std::vector<double> e2(n);
    for (std::size_t i = 0; i < n; ++i) e2[i] = std::norm(eo[0][i]);
    double mean_e2n = -Median(e2) / std::log(0.5);
    double noise_power = em_n > 0.0 ? mean_e2n / em_n : 0.0;
    double sum_an2 = 0.0, sum_aiaj = 0.0;
    for (int si = 0; si < nscale; ++si) {
      for (std::size_t i = 0; i < n; ++i) {
        double a = ifft_filters[static_cast<std::size_t>(si)][i];
        sum_an2 += a * a;
      }
      for (int sj = si + 1; sj < nscale; ++sj) {
        for (std::size_t i = 0; i < n; ++i) {
          sum_aiaj += ifft_filters[static_cast<std::size_t>(si)][i] *
                      ifft_filters[static_cast<std::size_t>(sj)][i];
        }
      }
    }
    double est_noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_aiaj;
    double tau = std::sqrt(std::max(0.0, est_noise_energy2) / 2.0);
    double est_noise_energy = tau * std::sqrt(std::numbers::pi / 2.0);
    double est_noise_sigma = std::sqrt((2.0 - std::numbers::pi / 2.0) * tau * tau);
    double threshold = (est_noise_energy + params.noise_k * est_noise_sigma) / 1.7;
    for (std::size_t i = 0; i < n; ++i) {
      energy_all[i] += std::max(energy[i] - threshold, 0.0);
      an_all[i] += sum_an[i];
    }
  }
  std::vector<double> pc(n);
  for (std::size_t i = 0; i < n; ++i) {
    pc[i] = an_all[i] > 0.0 ? energy_all[i] / an_all[i] : 0.0;
  }
  return pc;
}

std::vector<double> GradientMagnitude(const GrayImage& img) {
  const std::size_t rows = img.rows, cols = img.cols;
  static constexpr double kScharr[3][3] = {
      {3.0 / 16, 0.0, -3.0 / 16}, {10.0 / 16, 0.0, -10.0 / 16}, {3.0 / 16, 0.0, -3.0 / 16}};
  auto px = [&](long r, long c) {
    if (r < 0 || c < 0 || r >= static_cast<long>(rows) || c >= static_cast<long>(cols)) {
      return 0.0;
    }
    return img.pixels[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)];
  };
  std::vector<double> gm(rows * cols);
  for (long r = 0; r < static_cast<long>(rows); ++r) {
    for (long c = 0; c < static_cast<long>(cols); ++c) {
      double gx = 0.0, gy = 0.0;
      for (long u = -1; u <= 1; ++u) {
        for (long v = -1; v <= 1; ++v) {
          double p = px(r + u, c + v);
          gx += kScharr[u + 1][v + 1] * p;
          gy += kScharr[v + 1][u + 1] * p;
        }
      }
      gm[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)] =
          std::sqrt(gx * gx + gy * gy);
    }
  }
  return gm;
}

double Fsim(const GrayImage& a, const GrayImage& b, const FsimParams& params) {
  if (a.rows != b.rows || a.cols != b.cols || a.pixels.size() != b.pixels.size()) {
    throw ArgumentError("fsim: image shapes differ");
  }
  if (a.pixels.empty()) throw ArgumentError("fsim: empty image");
  std::vector<double> pc1 = PhaseCongruency(a, params);
  std::vector<double> pc2 = PhaseCongruency(b, params);
  std::vector<double> g1 = GradientMagnitude(a);
  std::vector<double> g2 = GradientMagnitude(b);
  double num = 0.0, den = 0.0, plain = 0.0;
  for (std::size_t i = 0; i < pc1.size(); ++i) {
    double s_pc = (2.0 * pc1[i] * pc2[i] + params.t1) /
                  (pc1[i] * pc1[i] + pc2[i] * pc2[i] + params.t1);
    double s_g = (2.0 * g1[i] * g2[i] + params.t2) /
                 (g1[i] * g1[i] + g2[i] * g2[i] + params.t2);
    double pcm = std::max(pc1[i], pc2[i]);
    num += s_pc * s_g * pcm;
    den += pcm;
    plain += s_pc * s_g;
  }
  // Featureless pair: fall back to the unweighted mean similarity.
  double v = den > 0.0 ? num / den : plain / static_cast<double>(pc1.size());
  return std::clamp(v, 0.0, 1.0);
}

double Fsim(const nn::Tensor& a, const nn::Tensor& b, const FsimParams& params) {
  if (a.shape() != b.shape()) {
    throw ArgumentError("fsim: shape " + nn::ShapeString(a.shape()) + " vs " +
                        nn::ShapeString(b.shape()));
  }
  return Fsim(Luminance(a), Luminance(b), params);
}

}  // namespace splitsim::attack
