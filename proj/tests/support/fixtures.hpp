#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "cgl/graphbuild.hpp"
#include "cgl/imgcore.hpp"
#include "cgl/superpixel.hpp"

namespace cgl::testing {

struct Rect {
  int x0, y0, x1, y1;  // half-open
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

struct SceneSpec {
  int width = 96;
  int height = 96;
  std::array<float, 3> rgb_background{0.15f, 0.2f, 0.15f};
  std::array<float, 3> rgb_object{0.9f, 0.8f, 0.3f};
  float t_background = 0.2f;
  float t_object = 0.9f;
  std::vector<Rect> objects;
  float noise = 0.02f;
  std::uint32_t seed = 7;
};

/// Piecewise-constant RGB-T scene with additive uniform noise and exact GT.
ImagePair make_scene(const SceneSpec& spec);

/// Bright, hot square on a dark, cold ground.
ImagePair bright_hot_object(int size = 96);
/// Object that only the thermal channel reveals.
ImagePair thermal_only_object(int size = 96);
/// Small salient object (under 5% of the image).
ImagePair small_object(int size = 96);

/// Uniformly random RGB-T pair.
ImagePair random_pair(int width, int height, std::uint32_t seed);

/// Rectangular tiling with `cols` x `rows` tiles.
SuperpixelMap tile_map(int width, int height, int cols, int rows);

/// Random segmentation by growing seeds (Voronoi under the city-block metric).
SuperpixelMap random_map(int width, int height, int seeds, std::uint32_t seed);

/// Stack of M*K random graphs on one random connected structure: a spanning
/// path plus extra edges with probability 0.4, weights uniform in (0.05, 1].
GraphStack random_stack(int n, int M, int K, std::mt19937& rng);

/// Random point of the probability simplex of dimension `size`.
Eigen::VectorXd random_simplex(int size, std::mt19937& rng);

}  // namespace cgl::testing
