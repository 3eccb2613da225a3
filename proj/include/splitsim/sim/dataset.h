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

#ifndef SPLITSIM_SIM_DATASET_H_
#define SPLITSIM_SIM_DATASET_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "splitsim/nn/tensor.h"
#include "splitsim/sim/rng.h"

namespace splitsim::sim {

// Labeled samples sharing one per-sample shape. `ids` are globally unique
// across every dataset produced by one generator call.
struct Dataset {
  nn::Shape sample_shape;
  std::vector<std::vector<double>> inputs;
  std::vector<int> labels;
  std::vector<std::size_t> ids;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  void push_back(std::vector<double> x, int label, std::size_t id);

  nn::Tensor batch(std::span<const std::size_t> rows) const;
  std::vector<int> batch_labels(std::span<const std::size_t> rows) const;
  nn::Tensor all_inputs() const;
  // Rows [first, last) as a new dataset.
  Dataset slice(std::size_t first, std::size_t last) const;
};

enum class DatasetKind { kBlobs, kTwoSpirals, kMiniImages };
DatasetKind ParseDatasetKind(std::string_view name);
std::string_view DatasetKindName(DatasetKind kind);

// Number of distinct mini-image class templates.
inline constexpr int kMiniImageTemplates = 8;

struct DatasetOptions {
  DatasetKind kind = DatasetKind::kMiniImages;
  int n_class = 4;
  std::size_t samples_per_client = 64;
  int n_clients = 1;
  std::size_t test_samples = 200;
  bool iid = true;
  std::size_t image_size = 8;   // mini-images: 8 or 16
  double pixel_noise = 0.1;     // mini-images Gaussian pixel noise
  std::size_t blob_dims = 2;    // blobs
  double blob_separation = 4.0; // blobs: center radius in units of blob std
  double spiral_noise = 0.1;    // two-spirals
};

struct FederatedData {
  std::vector<Dataset> clients;
  Dataset test;
};

// Disjoint per-client datasets plus a held-out test set. With iid set every
// client gets a label-balanced share; otherwise each client draws 80% of its
// samples from two dominant classes.
FederatedData MakeSyntheticDataset(const DatasetOptions& options,
                                   RngStream& rng);

// Class template in [0,1] for mini-images, row-major size x size.
std::vector<double> MiniImageTemplate(int cls, std::size_t size);

// Tab-separated dump: "part id label v0 v1 ...", one sample per line.
void WriteDataset(std::ostream& os, const FederatedData& data);

}  // namespace splitsim::sim

#endif  // SPLITSIM_SIM_DATASET_H_
