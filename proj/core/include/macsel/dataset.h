// Copyright 2026 The macsel Authors
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

// Datasets for the desk-scale network: IDX and CSV loaders plus two
// synthetic generators (handwritten-style digits and Gaussian blobs).

#ifndef MACSEL_DATASET_H_
#define MACSEL_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

namespace macsel {

struct Dataset {
  int rows = 0;
  int cols = 0;
  int num_classes = 0;
  std::vector<float> features;  // row-major, rows x cols
  std::vector<int> labels;

  const float* row(int i) const { return features.data() + size_t(i) * cols; }
  // Largest feature value (0 when empty).
  float MaxFeature() const;
  // Rows [begin, end) as a new dataset.
  Dataset Slice(int begin, int end) const;
};

struct DatasetSplit {
  Dataset train;
  Dataset test;
};

enum class DatasetFormat { kIdx, kCsv };

// IDX: `path` names the image file (magic 0x00000803, dims N x H x W, uint8
// pixels scaled to [0,1]); labels come from `labels_path` (magic 0x00000801).
// Malformed files raise Error(kParse) naming the offending byte offset or the
// expected and actual sizes.
Dataset LoadIdx(const std::string& images_path, const std::string& labels_path);

// CSV with header "label,f0,f1,...". Errors name the 1-based line.
Dataset LoadCsv(const std::string& path);

// Loads `dir` holding train-images.idx3-ubyte, train-labels.idx1-ubyte,
// test-images.idx3-ubyte and test-labels.idx1-ubyte, or train.csv/test.csv.
DatasetSplit LoadDatasetDir(const std::string& dir, DatasetFormat format);

void WriteIdx(const Dataset& d, const std::string& images_path,
              const std::string& labels_path);
void WriteCsv(const Dataset& d, const std::string& path);

// 28x28 grey-level digits drawn from per-class stroke skeletons with random
// affine jitter, stroke width and pixel noise. Pixels are multiples of
// 1/255, so the data survives an IDX round trip unchanged. Balanced classes
// in a seeded random order.
Dataset GenerateDigits(int count, uint64_t seed);

// `classes` isotropic Gaussian clusters in `dim` dimensions, centres drawn
// uniformly in [0, 1]^dim, features clipped to [0, 1].
Dataset GenerateBlobs(int count, int classes, int dim, double spread,
                      uint64_t seed);

}  // namespace macsel

#endif  // MACSEL_DATASET_H_
