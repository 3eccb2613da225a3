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

#include "splitsim/sim/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "splitsim/errors.h"

namespace splitsim::sim {

void Dataset::push_back(std::vector<double> x, int label, std::size_t id) {
  inputs.push_back(std::move(x));
  labels.push_back(label);
  ids.push_back(id);
}

nn::Tensor Dataset::batch(std::span<const std::size_t> rows) const {
  std::size_t per = nn::ShapeSize(sample_shape);
  nn::Shape shape{rows.size()};
  shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
  nn::Tensor t(shape);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& x = inputs.at(rows[r]);
    std::copy(x.begin(), x.end(), t.data() + r * per);
  }
  return t;
}

std::vector<int> Dataset::batch_labels(std::span<const std::size_t> rows) const {
  std::vector<int> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = labels.at(rows[r]);
  return out;
}

nn::Tensor Dataset::all_inputs() const {
  std::vector<std::size_t> rows(size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return batch(rows);
}

Dataset Dataset::slice(std::size_t first, std::size_t last) const {
  Dataset d;
  d.sample_shape = sample_shape;
  for (std::size_t i = first; i < last && i < size(); ++i) {
    d.push_back(inputs[i], labels[i], ids[i]);
  }
  return d;
}

DatasetKind ParseDatasetKind(std::string_view name) {
  if (name == "blobs") return DatasetKind::kBlobs;
  if (name == "two-spirals") return DatasetKind::kTwoSpirals;
  if (name == "mini-images") return DatasetKind::kMiniImages;
  throw ArgumentError("unknown dataset kind '" + std::string(name) + "'");
}

std::string_view DatasetKindName(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kBlobs:
      return "blobs";
    case DatasetKind::kTwoSpirals:
      return "two-spirals";
    case DatasetKind::kMiniImages:
      return "mini-images";
  }
  return "unknown";
}

std::vector<double> MiniImageTemplate(int cls, std::size_t size) {
  std::vector<double> img(size * size, 0.0);
  std::size_t q = std::max<std::size_t>(1, size / 4);
  long n = static_cast<long>(size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      bool on = false;
      long dy = static_cast<long>(y), dx = static_cast<long>(x);
      switch (cls) {
        case 0:  // horizontal bars
          on = (y / (q / 2 == 0 ? 1 : q / 2)) % 2 == 0;
          break;
        case 1:  // vertical bars
          on = (x / (q / 2 == 0 ? 1 : q / 2)) % 2 == 0;
          break;
        case 2:  // cross
          on = (y >= size / 2 - q / 2 - 1 && y <= size / 2 + q / 2) ||
               (x >= size / 2 - q / 2 - 1 && x <= size / 2 + q / 2);
          break;
        case 3:  // checkerboard
          on = ((y / q) + (x / q)) % 2 == 0;
          break;
        case 4:  // diagonal
          on = std::labs(dx - dy) <= n / 8;
          break;
        case 5:  // frame
          on = y < q / 2 + 1 || x < q / 2 + 1 || y >= size - q / 2 - 1 ||
               x >= size - q / 2 - 1;
          break;
        case 6:  // centered square
          on = y >= q && y < size - q && x >= q && x < size - q;
          break;
        case 7:  // anti-diagonal
          on = std::labs(dx + dy - (n - 1)) <= n / 8;
          break;
        default:
          throw ArgumentError("no mini-image template for class " +
                              std::to_string(cls));
      }
      img[y * size + x] = on ? 1.0 : 0.0;
    }
  }
  return img;
}

namespace {

struct Generator {
  const DatasetOptions& opt;
  std::vector<std::vector<double>> centers;

  nn::Shape shape() const {
    switch (opt.kind) {
      case DatasetKind::kBlobs:
        return {opt.blob_dims};
      case DatasetKind::kTwoSpirals:
        return {2};
      case DatasetKind::kMiniImages:
        return {1, opt.image_size, opt.image_size};
    }
    return {};
  }

  std::vector<double> sample(int cls, RngStream& rng) const {
    switch (opt.kind) {
      case DatasetKind::kBlobs: {
        std::vector<double> x = centers[static_cast<std::size_t>(cls)];
        for (double& v : x) v += rng.normal();
        return x;
      }
      case DatasetKind::kTwoSpirals: {
        double t = rng.uniform();
        double r = 0.2 + 0.8 * t;
        double a = 3.0 * std::numbers::pi * t +
                   2.0 * std::numbers::pi * cls / opt.n_class;
        return {r * std::cos(a) + opt.spiral_noise * rng.normal(),
                r * std::sin(a) + opt.spiral_noise * rng.normal()};
      }
      case DatasetKind::kMiniImages: {
        std::vector<double> x = MiniImageTemplate(cls, opt.image_size);
        for (double& v : x) {
          v = std::clamp(v + opt.pixel_noise * rng.normal(), 0.0, 1.0);
        }
        return x;
      }
    }
    return {};
  }
};

std::vector<int> ClientLabels(const DatasetOptions& opt, int client,
                              std::size_t n) {
  std::vector<int> labels(n);
  if (opt.iid) {
    for (std::size_t j = 0; j < n; ++j) {
      labels[j] = static_cast<int>((j + static_cast<std::size_t>(client)) %
                                   static_cast<std::size_t>(opt.n_class));
    }
    return labels;
  }
  std::size_t dominant = (n * 4) / 5;
  int a = client % opt.n_class;
  int b = (client + 1) % opt.n_class;
  for (std::size_t j = 0; j < n; ++j) {
    if (j < dominant) {
      labels[j] = j % 2 == 0 ? a : b;
    } else {
      labels[j] = static_cast<int>(j % static_cast<std::size_t>(opt.n_class));
    }
  }
  return labels;
}

}  // namespace

FederatedData MakeSyntheticDataset(const DatasetOptions& options,
                                   RngStream& rng) {
  if (options.n_class < 2) throw ArgumentError("n_class must be at least 2");
  if (options.kind == DatasetKind::kMiniImages) {
    if (options.n_class > kMiniImageTemplates) {
      throw ArgumentError("mini-images supports at most " +
                          std::to_string(kMiniImageTemplates) + " classes");
    }
    if (options.image_size < 4) {
      throw ArgumentError("mini-images need image_size >= 4");
    }
  }
  if (options.kind == DatasetKind::kBlobs && options.blob_dims < 2) {
    throw ArgumentError("blobs need at least 2 dimensions");
  }
  if (options.n_clients < 1) throw ArgumentError("need at least one client");

  Generator gen{options, {}};
  if (options.kind == DatasetKind::kBlobs) {
    RngStream crng = rng.derive("centers");
    for (int c = 0; c < options.n_class; ++c) {
      std::vector<double> center(options.blob_dims, 0.0);
      double a = 2.0 * std::numbers::pi * c / options.n_class;
      center[0] = options.blob_separation * std::cos(a);
      center[1] = options.blob_separation * std::sin(a);
      for (std::size_t d = 2; d < options.blob_dims; ++d) {
        center[d] = options.blob_separation * 0.5 * crng.normal();
      }
      gen.centers.push_back(std::move(center));
    }
  }

  FederatedData out;
  std::size_t next_id = 0;
  for (int c = 0; c < options.n_clients; ++c) {
    Dataset d;
    d.sample_shape = gen.shape();
    RngStream srng = rng.path("client", static_cast<std::uint64_t>(c));
    std::vector<int> labels =
        ClientLabels(options, c, options.samples_per_client);
    Shuffle(labels, srng);
    for (int y : labels) d.push_back(gen.sample(y, srng), y, next_id++);
    out.clients.push_back(std::move(d));
  }
  out.test.sample_shape = gen.shape();
  RngStream trng = rng.derive("test");
  for (std::size_t j = 0; j < options.test_samples; ++j) {
    int y = static_cast<int>(j % static_cast<std::size_t>(options.n_class));
    out.test.push_back(gen.sample(y, trng), y, next_id++);
  }
  return out;
}

void WriteDataset(std::ostream& os, const FederatedData& data) {
  char buf[40];
  auto dump = [&](const std::string& part, const Dataset& d) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      os << part << '\t' << d.ids[i] << '\t' << d.labels[i];
      for (double v : d.inputs[i]) {
        std::snprintf(buf, sizeof(buf), "\t%.17g", v);
        os << buf;
      }
      os << '\n';
    }
  };
  for (std::size_t c = 0; c < data.clients.size(); ++c) {
    dump("client" + std::to_string(c + 1), data.clients[c]);
  }
  dump("test", data.test);
}

}  // namespace splitsim::sim
