// Copyright 2026 The kronprec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kronprec/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "kronprec/errors.hpp"
#include "kronprec/rng.hpp"

namespace kronprec::data {
namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset,
                        const char* what) {
  if (offset + 4 > bytes.size())
    throw IdxError(IdxError::Kind::truncated,
                   std::string("idx: truncated stream while reading ") + what);
  return (std::uint32_t{bytes[offset]} << 24) |
         (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) |
         std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  out.push_back(static_cast<std::uint8_t>(value >> 24));
  out.push_back(static_cast<std::uint8_t>(value >> 16));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
  out.push_back(static_cast<std::uint8_t>(value));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Dataset parse_idx(std::span<const std::uint8_t> images,
                  std::span<const std::uint8_t> labels,
                  Normalization normalization) {
  std::uint32_t images_magic = read_be32(images, 0, "images magic");
  if (images_magic != kImagesMagic)
    throw IdxError(IdxError::Kind::bad_magic,
                   "idx: bad images magic " + std::to_string(images_magic));
  std::uint32_t labels_magic = read_be32(labels, 0, "labels magic");
  if (labels_magic != kLabelsMagic)
    throw IdxError(IdxError::Kind::bad_magic,
                   "idx: bad labels magic " + std::to_string(labels_magic));

  std::uint32_t count = read_be32(images, 4, "image count");
  std::uint32_t rows = read_be32(images, 8, "image rows");
  std::uint32_t cols = read_be32(images, 12, "image cols");
  std::uint32_t label_count = read_be32(labels, 4, "label count");
  if (count != label_count)
    throw IdxError(IdxError::Kind::count_mismatch,
                   "idx: image count " + std::to_string(count) +
                       " != label count " + std::to_string(label_count));

  std::size_t pixels = std::size_t{count} * rows * cols;
  if (images.size() < 16 + pixels)
    throw IdxError(IdxError::Kind::truncated, "idx: truncated image payload");
  if (labels.size() < 8 + count)
    throw IdxError(IdxError::Kind::truncated, "idx: truncated label payload");

  Dataset ds;
  ds.normalization = normalization;
  ds.x = Matrix(static_cast<Index>(count), static_cast<Index>(rows * cols));
  const bool scale = normalization == Normalization::scale_255;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* src = images.data() + 16 + i * rows * cols;
    double* dst = ds.x.row(static_cast<Index>(i));
    for (std::size_t p = 0; p < std::size_t{rows} * cols; ++p) {
      double v = static_cast<double>(src[p]);
      dst[p] = scale ? v / 255.0 : v;
    }
  }
  ds.y.resize(count);
  Index max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    ds.y[i] = static_cast<Index>(labels[8 + i]);
    max_label = std::max(max_label, ds.y[i]);
  }
  ds.num_classes = max_label + 1;
  if (normalization == Normalization::standardize) {
    for (Index j = 0; j < ds.x.cols(); ++j) {
      double mean = 0.0, var = 0.0;
      for (Index i = 0; i < ds.x.rows(); ++i) mean += ds.x(i, j);
      mean /= static_cast<double>(ds.x.rows());
      for (Index i = 0; i < ds.x.rows(); ++i) {
        double d = ds.x(i, j) - mean;
        var += d * d;
      }
      double sd = std::sqrt(var / static_cast<double>(ds.x.rows()));
      if (sd == 0.0) sd = 1.0;
      for (Index i = 0; i < ds.x.rows(); ++i) ds.x(i, j) = (ds.x(i, j) - mean) / sd;
    }
  }
  return ds;
}

Dataset load_idx_files(const std::filesystem::path& images,
                       const std::filesystem::path& labels,
                       Normalization normalization) {
  std::vector<std::uint8_t> image_bytes = read_file(images);
  std::vector<std::uint8_t> label_bytes = read_file(labels);
  return parse_idx(image_bytes, label_bytes, normalization);
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> to_idx_bytes(
    const Dataset& ds, Index image_rows, Index image_cols) {
  if (image_rows * image_cols != ds.dim())
    throw DimensionError("to_idx_bytes: rows*cols must equal input dim");
  if (ds.normalization == Normalization::standardize)
    throw Error("to_idx_bytes: standardized data is not byte-exact");
  const double scale =
      ds.normalization == Normalization::scale_255 ? 255.0 : 1.0;

  std::vector<std::uint8_t> images;
  images.reserve(16 + static_cast<std::size_t>(ds.size() * ds.dim()));
  write_be32(images, kImagesMagic);
  write_be32(images, static_cast<std::uint32_t>(ds.size()));
  write_be32(images, static_cast<std::uint32_t>(image_rows));
  write_be32(images, static_cast<std::uint32_t>(image_cols));
  for (Index i = 0; i < ds.size(); ++i) {
    const double* row = ds.x.row(i);
    for (Index p = 0; p < ds.dim(); ++p) {
      double v = row[p] * scale;
      double rounded = std::round(v);
      if (std::abs(v - rounded) > 1e-6 || rounded < 0.0 || rounded > 255.0)
        throw Error("to_idx_bytes: entry does not map to a byte");
      images.push_back(static_cast<std::uint8_t>(rounded));
    }
  }

  std::vector<std::uint8_t> labels;
  labels.reserve(8 + static_cast<std::size_t>(ds.size()));
  write_be32(labels, kLabelsMagic);
  write_be32(labels, static_cast<std::uint32_t>(ds.size()));
  for (Index label : ds.y) labels.push_back(static_cast<std::uint8_t>(label));
  return {std::move(images), std::move(labels)};
}

Dataset subsample_classes(const Dataset& ds, const std::vector<Index>& keep) {
  if (keep.empty()) throw DimensionError("subsample_classes: empty keep set");
  std::vector<Index> relabel(static_cast<std::size_t>(ds.num_classes), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] < 0 || keep[k] >= ds.num_classes)
      throw DimensionError("subsample_classes: class out of range");
    relabel[static_cast<std::size_t>(keep[k])] = static_cast<Index>(k);
  }
  std::vector<Index> rows;
  for (Index i = 0; i < ds.size(); ++i)
    if (relabel[static_cast<std::size_t>(ds.y[static_cast<std::size_t>(i)])] >= 0)
      rows.push_back(i);
  if (rows.empty())
    throw DegenerateInputError("subsample_classes: no examples survive");

  Dataset out;
  out.normalization = ds.normalization;
  out.num_classes = static_cast<Index>(keep.size());
  out.x = Matrix(static_cast<Index>(rows.size()), ds.dim());
  out.y.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double* src = ds.x.row(rows[r]);
    std::copy(src, src + ds.dim(), out.x.row(static_cast<Index>(r)));
    out.y[r] = relabel[static_cast<std::size_t>(ds.y[static_cast<std::size_t>(rows[r])])];
  }
  return out;
}

Dataset synth_gaussian_classes(Index dim, Index num_classes, Index per_class,
                               double separation, std::uint64_t seed) {
  if (dim < 1 || num_classes < 1 || per_class < 1)
    throw DimensionError("synth_gaussian_classes: bad sizes");
  if (separation < 0.0)
    throw DimensionError("synth_gaussian_classes: separation must be >= 0");
  Dataset ds;
  ds.num_classes = num_classes;
  ds.normalization = Normalization::none;
  ds.x = Matrix(num_classes * per_class, dim);
  ds.y.resize(static_cast<std::size_t>(num_classes * per_class));
  Rng rng(seed);
  Index row = 0;
  for (Index c = 0; c < num_classes; ++c) {
    for (Index k = 0; k < per_class; ++k, ++row) {
      double* dst = ds.x.row(row);
      for (Index j = 0; j < dim; ++j) dst[j] = rng.gaussian();
      dst[c % dim] += separation;
      ds.y[static_cast<std::size_t>(row)] = c;
    }
  }
  return ds;
}

Dataset downsample_images(const Dataset& ds, Index side, Index factor) {
  if (side * side != ds.dim())
    throw DimensionError("downsample_images: inputs are not side x side");
  if (factor < 1 || side % factor != 0)
    throw DimensionError("downsample_images: factor must divide side");
  const Index out_side = side / factor;
  Dataset out;
  out.normalization = ds.normalization;
  out.num_classes = ds.num_classes;
  out.y = ds.y;
  out.x = Matrix(ds.size(), out_side * out_side);
  const double inv = 1.0 / static_cast<double>(factor * factor);
  for (Index i = 0; i < ds.size(); ++i) {
    const double* src = ds.x.row(i);
    double* dst = out.x.row(i);
    for (Index r = 0; r < out_side; ++r) {
      for (Index c = 0; c < out_side; ++c) {
        double acc = 0.0;
        for (Index dr = 0; dr < factor; ++dr)
          for (Index dc = 0; dc < factor; ++dc)
            acc += src[(r * factor + dr) * side + (c * factor + dc)];
        dst[r * out_side + c] = acc * inv;
      }
    }
  }
  return out;
}

}  // namespace kronprec::data
