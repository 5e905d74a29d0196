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

#include "macsel/dataset.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "macsel/error.h"
#include "macsel/io.h"
#include "macsel/rng.h"

namespace macsel {
namespace {

constexpr uint32_t kIdxImagesMagic = 0x00000803;
constexpr uint32_t kIdxLabelsMagic = 0x00000801;

uint32_t ReadBe32(const std::string& data, size_t offset) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v = (v << 8) | static_cast<uint8_t>(data[offset + i]);
  }
  return v;
}

void AppendBe32(std::string& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void CheckSize(const std::string& path, const std::string& data,
               size_t expected, const char* what) {
  if (data.size() < expected) {
    Fail(ErrorCode::kParse, path + ": truncated " + what + ": expected " +
                                std::to_string(expected) + " bytes, got " +
                                std::to_string(data.size()));
  }
  if (data.size() > expected) {
    Fail(ErrorCode::kParse, path + ": trailing bytes after offset " +
                                std::to_string(expected) + " (file has " +
                                std::to_string(data.size()) + ")");
  }
}

struct Point {
  double x, y;
};
using Stroke = std::vector<Point>;

Stroke Ellipse(double cx, double cy, double rx, double ry, int n = 16) {
  Stroke s;
  for (int i = 0; i <= n; ++i) {
    const double t = 2 * std::numbers::pi * i / n;
    s.push_back({cx + rx * std::sin(t), cy - ry * std::cos(t)});
  }
  return s;
}

// Stroke skeletons in a unit box, x to the right and y downwards.
const std::array<std::vector<Stroke>, 10>& DigitTemplates() {
  static const std::array<std::vector<Stroke>, 10> templates = {{
      {Ellipse(0.5, 0.5, 0.3, 0.45)},
      {{{0.35, 0.2}, {0.52, 0.05}, {0.52, 0.95}}},
      {{{0.2, 0.25}, {0.3, 0.1}, {0.5, 0.05}, {0.7, 0.1}, {0.78, 0.28},
        {0.7, 0.45}, {0.2, 0.95}, {0.82, 0.95}}},
      {{{0.2, 0.1}, {0.5, 0.05}, {0.75, 0.15}, {0.75, 0.35}, {0.45, 0.48},
        {0.75, 0.6}, {0.78, 0.8}, {0.55, 0.95}, {0.2, 0.88}}},
      {{{0.65, 0.95}, {0.65, 0.05}, {0.15, 0.65}, {0.85, 0.65}}},
      {{{0.78, 0.05}, {0.25, 0.05}, {0.22, 0.45}, {0.5, 0.4}, {0.75, 0.55},
        {0.75, 0.8}, {0.5, 0.95}, {0.2, 0.88}}},
      {{{0.7, 0.08}, {0.45, 0.1}, {0.28, 0.35}, {0.22, 0.65}, {0.3, 0.9},
        {0.55, 0.95}, {0.75, 0.8}, {0.72, 0.6}, {0.5, 0.5}, {0.3, 0.58}}},
      {{{0.2, 0.05}, {0.8, 0.05}, {0.45, 0.95}}},
      {Ellipse(0.5, 0.27, 0.22, 0.22), Ellipse(0.5, 0.72, 0.27, 0.23)},
      {Ellipse(0.5, 0.3, 0.25, 0.22), {{0.75, 0.3}, {0.7, 0.95}}},
  }};
  return templates;
}

double SegmentDistance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.x + t * dx - p.x, ey = a.y + t * dy - p.y;
  return std::sqrt(ex * ex + ey * ey);
}

void RenderDigit(int digit, Rng& rng, float* out) {
  constexpr int kSide = 28;
  const double angle = (rng.UniformDouble() - 0.5) * 0.45;
  const double scale_x = 17.0 + rng.UniformDouble() * 5.0;
  const double scale_y = 17.0 + rng.UniformDouble() * 5.0;
  const double shear = (rng.UniformDouble() - 0.5) * 0.5;
  const double tx = (rng.UniformDouble() - 0.5) * 4.0;
  const double ty = (rng.UniformDouble() - 0.5) * 4.0;
  const double half_width = 0.9 + rng.UniformDouble() * 0.9;
  const double c = std::cos(angle), s = std::sin(angle);

  std::vector<Stroke> strokes = DigitTemplates()[digit];
  for (Stroke& stroke : strokes) {
    for (Point& p : stroke) {
      const double jx = p.x - 0.5 + (rng.UniformDouble() - 0.5) * 0.08;
      const double jy = p.y - 0.5 + (rng.UniformDouble() - 0.5) * 0.08;
      const double sx = (jx + shear * jy) * scale_x;
      const double sy = jy * scale_y;
      p = {13.5 + tx + c * sx - s * sy, 13.5 + ty + s * sx + c * sy};
    }
  }
  for (int y = 0; y < kSide; ++y) {
    for (int x = 0; x < kSide; ++x) {
      double d = 1e9;
      for (const Stroke& stroke : strokes) {
        for (size_t i = 0; i + 1 < stroke.size(); ++i) {
          d = std::min(d, SegmentDistance({double(x), double(y)}, stroke[i],
                                          stroke[i + 1]));
        }
      }
      double v = std::clamp(half_width + 0.5 - d, 0.0, 1.0);
      v = std::clamp(v + rng.Normal() * 0.06, 0.0, 1.0);
      out[y * kSide + x] = static_cast<float>(std::lround(v * 255.0)) / 255.0f;
    }
  }
}

}  // namespace

float Dataset::MaxFeature() const {
  float m = 0.0f;
  for (float f : features) m = std::max(m, f);
  return m;
}

Dataset Dataset::Slice(int begin, int end) const {
  if (begin < 0 || end > rows || begin > end) {
    Fail(ErrorCode::kRange, "dataset slice out of range");
  }
  Dataset d;
  d.rows = end - begin;
  d.cols = cols;
  d.num_classes = num_classes;
  d.features.assign(features.begin() + size_t(begin) * cols,
                    features.begin() + size_t(end) * cols);
  d.labels.assign(labels.begin() + begin, labels.begin() + end);
  return d;
}

Dataset LoadIdx(const std::string& images_path,
                const std::string& labels_path) {
  const std::string images = ReadFile(images_path);
  const std::string labels = ReadFile(labels_path);
  if (images.size() < 16) {
    CheckSize(images_path, images, 16, "header");
  }
  if (ReadBe32(images, 0) != kIdxImagesMagic) {
    Fail(ErrorCode::kParse, images_path + ": bad magic at byte 0");
  }
  const uint32_t n = ReadBe32(images, 4);
  const uint32_t h = ReadBe32(images, 8);
  const uint32_t w = ReadBe32(images, 12);
  CheckSize(images_path, images, 16 + size_t(n) * h * w, "pixel payload");
  if (labels.size() < 8) CheckSize(labels_path, labels, 8, "header");
  if (ReadBe32(labels, 0) != kIdxLabelsMagic) {
    Fail(ErrorCode::kParse, labels_path + ": bad magic at byte 0");
  }
  if (ReadBe32(labels, 4) != n) {
    Fail(ErrorCode::kParse, labels_path + ": label count " +
                                std::to_string(ReadBe32(labels, 4)) +
                                " does not match image count " +
                                std::to_string(n));
  }
  CheckSize(labels_path, labels, 8 + size_t(n), "label payload");

  Dataset d;
  d.rows = static_cast<int>(n);
  d.cols = static_cast<int>(h * w);
  d.features.resize(size_t(n) * h * w);
  for (size_t i = 0; i < d.features.size(); ++i) {
    d.features[i] = static_cast<uint8_t>(images[16 + i]) / 255.0f;
  }
  d.labels.resize(n);
  for (uint32_t i = 0; i < n; ++i) {
    d.labels[i] = static_cast<uint8_t>(labels[8 + i]);
    d.num_classes = std::max(d.num_classes, d.labels[i] + 1);
  }
  return d;
}

Dataset LoadCsv(const std::string& path) {
  const std::vector<CsvRow> rows = ParseCsv(ReadFile(path));
  if (rows.empty() || rows[0].empty() || rows[0][0] != "label") {
    Fail(ErrorCode::kParse, path + ":1: expected header 'label,f0,...'");
  }
  Dataset d;
  d.cols = static_cast<int>(rows[0].size()) - 1;
  for (size_t r = 1; r < rows.size(); ++r) {
    const std::string where = path + ":" + std::to_string(r + 1);
    if (static_cast<int>(rows[r].size()) != d.cols + 1) {
      Fail(ErrorCode::kParse, where + ": expected " +
                                  std::to_string(d.cols + 1) + " fields, got " +
                                  std::to_string(rows[r].size()));
    }
    try {
      const long long label = ParseInt(rows[r][0], "label");
      if (label < 0) Fail(ErrorCode::kParse, "negative label");
      d.labels.push_back(static_cast<int>(label));
      d.num_classes = std::max(d.num_classes, static_cast<int>(label) + 1);
      for (int c = 0; c < d.cols; ++c) {
        const double v = ParseDouble(rows[r][c + 1], "feature");
        if (!std::isfinite(v)) Fail(ErrorCode::kParse, "non-finite feature");
        d.features.push_back(static_cast<float>(v));
      }
    } catch (const Error& e) {
      Fail(ErrorCode::kParse, where + ": " + e.what());
    }
  }
  d.rows = static_cast<int>(d.labels.size());
  return d;
}

DatasetSplit LoadDatasetDir(const std::string& dir, DatasetFormat format) {
  const std::filesystem::path base(dir);
  DatasetSplit split;
  if (format == DatasetFormat::kIdx) {
    split.train = LoadIdx((base / "train-images.idx3-ubyte").string(),
                          (base / "train-labels.idx1-ubyte").string());
    split.test = LoadIdx((base / "test-images.idx3-ubyte").string(),
                         (base / "test-labels.idx1-ubyte").string());
  } else {
    split.train = LoadCsv((base / "train.csv").string());
    split.test = LoadCsv((base / "test.csv").string());
  }
  if (split.train.cols != split.test.cols) {
    Fail(ErrorCode::kParse, dir + ": train and test feature widths differ");
  }
  const int classes = std::max(split.train.num_classes, split.test.num_classes);
  split.train.num_classes = split.test.num_classes = classes;
  return split;
}

void WriteIdx(const Dataset& d, const std::string& images_path,
              const std::string& labels_path) {
  const int side = static_cast<int>(std::lround(std::sqrt(d.cols)));
  const bool square = side * side == d.cols;
  std::string images;
  AppendBe32(images, kIdxImagesMagic);
  AppendBe32(images, static_cast<uint32_t>(d.rows));
  AppendBe32(images, static_cast<uint32_t>(square ? side : 1));
  AppendBe32(images, static_cast<uint32_t>(square ? side : d.cols));
  for (float f : d.features) {
    const long v = std::lround(std::clamp(f, 0.0f, 1.0f) * 255.0f);
    images.push_back(static_cast<char>(v));
  }
  std::string labels;
  AppendBe32(labels, kIdxLabelsMagic);
  AppendBe32(labels, static_cast<uint32_t>(d.rows));
  for (int l : d.labels) labels.push_back(static_cast<char>(l));
  WriteFile(images_path, images);
  WriteFile(labels_path, labels);
}

void WriteCsv(const Dataset& d, const std::string& path) {
  std::vector<CsvRow> rows(1);
  rows[0].push_back("label");
  for (int c = 0; c < d.cols; ++c) rows[0].push_back("f" + std::to_string(c));
  for (int r = 0; r < d.rows; ++r) {
    CsvRow row{std::to_string(d.labels[r])};
    for (int c = 0; c < d.cols; ++c) row.push_back(FormatDouble(d.row(r)[c]));
    rows.push_back(std::move(row));
  }
  WriteFile(path, EmitCsv(rows));
}

Dataset GenerateDigits(int count, uint64_t seed) {
  if (count < 0) Fail(ErrorCode::kRange, "negative sample count");
  Rng rng(seed);
  std::vector<int> labels(count);
  for (int i = 0; i < count; ++i) labels[i] = i % 10;
  rng.Shuffle(labels);
  Dataset d;
  d.rows = count;
  d.cols = 28 * 28;
  d.num_classes = 10;
  d.labels = labels;
  d.features.resize(size_t(count) * d.cols);
  for (int i = 0; i < count; ++i) {
    Rng sample_rng(DeriveSeed(seed, static_cast<uint64_t>(i)));
    RenderDigit(labels[i], sample_rng, d.features.data() + size_t(i) * d.cols);
  }
  return d;
}

Dataset GenerateBlobs(int count, int classes, int dim, double spread,
                      uint64_t seed) {
  if (count < 0 || classes < 1 || dim < 1) {
    Fail(ErrorCode::kRange, "invalid blob dataset shape");
  }
  Rng rng(seed);
  std::vector<double> centres(size_t(classes) * dim);
  for (double& c : centres) c = rng.UniformDouble();
  Dataset d;
  d.rows = count;
  d.cols = dim;
  d.num_classes = classes;
  for (int i = 0; i < count; ++i) {
    const int label = static_cast<int>(rng.UniformInt(classes));
    d.labels.push_back(label);
    for (int k = 0; k < dim; ++k) {
      const double v = centres[size_t(label) * dim + k] + spread * rng.Normal();
      d.features.push_back(static_cast<float>(std::clamp(v, 0.0, 1.0)));
    }
  }
  return d;
}

}  // namespace macsel
