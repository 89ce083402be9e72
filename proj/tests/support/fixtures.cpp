#include "fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace cgl::testing {

ImagePair make_scene(const SceneSpec& spec) {
  std::mt19937 rng(spec.seed);
  std::uniform_real_distribution<float> jitter(-spec.noise, spec.noise);
  ImagePair pair;
  pair.id = "scene";
  pair.rgb = Raster(spec.width, spec.height, 3);
  pair.thermal = Raster(spec.width, spec.height, 1);
  Raster gt(spec.width, spec.height, 1);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const bool inside = std::any_of(spec.objects.begin(), spec.objects.end(),
                                      [&](const Rect& r) { return r.contains(x, y); });
      for (int c = 0; c < 3; ++c) {
        const float base = inside ? spec.rgb_object[c] : spec.rgb_background[c];
        pair.rgb.at(x, y, c) = std::clamp(base + jitter(rng), 0.0f, 1.0f);
      }
      const float t = inside ? spec.t_object : spec.t_background;
      pair.thermal.at(x, y) = std::clamp(t + jitter(rng), 0.0f, 1.0f);
      gt.at(x, y) = inside ? 1.0f : 0.0f;
    }
  }
  pair.gt = std::move(gt);
  return pair;
}

ImagePair bright_hot_object(int size) {
  SceneSpec spec;
  spec.width = spec.height = size;
  spec.objects = {{size * 3 / 10, size * 3 / 10, size * 7 / 10, size * 7 / 10}};
  ImagePair p = make_scene(spec);
  p.id = "bright_hot";
  return p;
}

ImagePair thermal_only_object(int size) {
  SceneSpec spec;
  spec.width = spec.height = size;
  spec.rgb_object = spec.rgb_background;
  spec.objects = {{size * 3 / 10, size / 4, size * 7 / 10, size * 3 / 4}};
  spec.seed = 11;
  ImagePair p = make_scene(spec);
  p.id = "thermal_only";
  return p;
}

ImagePair small_object(int size) {
  SceneSpec spec;
  spec.width = spec.height = size;
  const int side = size * 2 / 10;  // 4% of the area
  spec.objects = {{size / 2 - side / 2, size / 2 - side / 2, size / 2 + side / 2,
                   size / 2 + side / 2}};
  spec.seed = 13;
  ImagePair p = make_scene(spec);
  p.id = "small_object";
  return p;
}

ImagePair random_pair(int width, int height, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ImagePair pair;
  pair.id = "random";
  pair.rgb = Raster(width, height, 3);
  pair.thermal = Raster(width, height, 1);
  for (auto& v : pair.rgb.data()) v = u(rng);
  for (auto& v : pair.thermal.data()) v = u(rng);
  return pair;
}

SuperpixelMap tile_map(int width, int height, int cols, int rows) {
  std::vector<int> labels(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int c = std::min(cols - 1, x * cols / width);
      const int r = std::min(rows - 1, y * rows / height);
      labels[static_cast<std::size_t>(y) * width + x] = r * cols + c;
    }
  }
  return make_superpixel_map(width, height, std::move(labels));
}

SuperpixelMap random_map(int width, int height, int seeds, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> ux(0, width - 1), uy(0, height - 1);
  std::vector<std::pair<int, int>> centres;
  for (int i = 0; i < seeds; ++i) centres.emplace_back(ux(rng), uy(rng));
  std::vector<int> labels(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int best = 0, best_d = std::numeric_limits<int>::max();
      for (int i = 0; i < seeds; ++i) {
        const int d = std::abs(x - centres[i].first) + std::abs(y - centres[i].second);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      labels[static_cast<std::size_t>(y) * width + x] = best;
    }
  }
  // Compact away seeds that captured no pixel.
  std::vector<int> remap(seeds, -1);
  int next = 0;
  for (auto& l : labels) {
    if (remap[l] < 0) remap[l] = next++;
    l = remap[l];
  }
  return make_superpixel_map(width, height, std::move(labels));
}

GraphStack random_stack(int n, int M, int K, std::mt19937& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Adjacency adj(n);
  for (int i = 0; i + 1 < n; ++i) adj.connect(order[i], order[i + 1]);
  std::bernoulli_distribution extra(0.4);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (extra(rng)) adj.connect(i, j);
    }
  }
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::vector<Eigen::MatrixXd> affinities;
  for (int g = 0; g < M * K; ++g) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [i, j] : adj.edges()) A(i, j) = A(j, i) = weight(rng);
    affinities.push_back(std::move(A));
  }
  GraphStack stack = make_stack(M, K, std::move(affinities));
  stack.adjacency = adj;
  return stack;
}

Eigen::VectorXd random_simplex(int size, std::mt19937& rng) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v(i) = e(rng);
  return v / v.sum();
}

}  // namespace cgl::testing
