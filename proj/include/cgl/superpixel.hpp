#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cgl/imgcore.hpp"

namespace cgl {

enum class Side : std::uint8_t { Top = 1, Bottom = 2, Left = 4, Right = 8 };

inline constexpr Side kAllSides[] = {Side::Top, Side::Bottom, Side::Left, Side::Right};

const char* to_string(Side side) noexcept;

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

/// Pixel -> superpixel labelling shared by both modalities.
struct SuperpixelMap {
  int width = 0;
  int height = 0;
  int n = 0;
  std::vector<int> labels;              // row-major, values in [0, n)
  std::vector<Centroid> centroids;      // pixel coordinates
  std::vector<std::size_t> sizes;       // pixel counts
  std::vector<std::uint8_t> sides;      // bitmask of Side

  int label(int x, int y) const noexcept {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  bool touches(int sp, Side side) const noexcept {
    return (sides[sp] & static_cast<std::uint8_t>(side)) != 0;
  }
};

/// Rebuilds centroids, sizes and side flags from a label raster.
/// Labels must already be contiguous in [0, n).
SuperpixelMap make_superpixel_map(int width, int height, std::vector<int> labels);

struct SlicOptions {
  int n_target = 300;
  // Spatial weight relative to unit-range (L,a,b,T) features.
  double compactness = 10.0 / 1.4142135623730951 / 100.0;
  int max_iters = 10;
  // Worker threads for the assignment step; the result does not depend on it.
  int threads = 1;
};

/// Joint SLIC over (L,a,b,T,x,y) followed by 4-connectivity enforcement.
SuperpixelMap slic_segment(const ImagePair& pair, const SlicOptions& options = {});

/// Same as above on precomputed per-pixel features (any channel count).
SuperpixelMap slic_segment(const Raster& features, const SlicOptions& options);

/// Dense symmetric, irreflexive adjacency relation with a cached edge list.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(int n) : n_(n), dense_(static_cast<std::size_t>(n) * n, 0) {}

  int size() const noexcept { return n_; }
  bool operator()(int i, int j) const noexcept {
    return dense_[static_cast<std::size_t>(i) * n_ + j] != 0;
  }
  void connect(int i, int j);
  /// Undirected edges with i < j, lexicographically sorted.
  std::vector<std::pair<int, int>> edges() const;
  std::size_t edge_count() const;

 private:
  int n_ = 0;
  std::vector<std::uint8_t> dense_;
};

/// 8-neighbour spatial adjacency between superpixels.
Adjacency adjacency(const SuperpixelMap& map);

/// Adds neighbour-of-neighbour edges and connects all boundary superpixels
/// pairwise (off by default in the pipeline).
Adjacency extend_adjacency(const Adjacency& base, const SuperpixelMap& map);

/// Debug rendering: label id mod 256 as 8-bit gray.
Raster label_image(const SuperpixelMap& map);

}  // namespace cgl
