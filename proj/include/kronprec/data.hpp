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

#ifndef KRONPREC_DATA_HPP
#define KRONPREC_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "kronprec/matrix.hpp"

namespace kronprec::data {

enum class Normalization { none, scale_255, standardize };

struct Dataset {
  Matrix x;                  // N x d inputs, one row per example
  std::vector<Index> y;      // labels in [0, num_classes)
  Index num_classes = 0;
  Normalization normalization = Normalization::none;

  Index size() const { return x.rows(); }
  Index dim() const { return x.cols(); }
  std::span<const double> example(Index i) const {
    return {x.row(i), static_cast<std::size_t>(x.cols())};
  }
};

// IDX container parsing. Images: big-endian magic 0x00000803, count, rows,
// cols, then one unsigned byte per pixel, row-major per image. Labels:
// magic 0x00000801, count, one byte per label. Counts must agree. Pixels
// are divided by 255 under scale_255.
Dataset parse_idx(std::span<const std::uint8_t> images,
                  std::span<const std::uint8_t> labels,
                  Normalization normalization = Normalization::scale_255);

Dataset load_idx_files(const std::filesystem::path& images,
                       const std::filesystem::path& labels,
                       Normalization normalization = Normalization::scale_255);

// Serializes back to IDX bytes (images, labels). Pixel values are recovered
// by inverting scale_255 when that normalization is set; entries must round
// to integers in [0, 255].
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> to_idx_bytes(
    const Dataset& ds, Index image_rows, Index image_cols);

// Keeps only the listed classes and relabels them to 0..|keep|-1 in the
// order given. Throws DegenerateInputError if nothing survives.
Dataset subsample_classes(const Dataset& ds, const std::vector<Index>& keep);

// Class c is N(mu_c, I) with mu_c = separation * e_{c mod d}.
Dataset synth_gaussian_classes(Index dim, Index num_classes,
                               Index per_class, double separation,
                               std::uint64_t seed);

// Average-pools square side x side images by an integer factor.
Dataset downsample_images(const Dataset& ds, Index side, Index factor);

}  // namespace kronprec::data

#endif  // KRONPREC_DATA_HPP
