#include <doctest.h>

#include <queue>
#include <set>

#include "cgl/superpixel.hpp"
#include "check.hpp"
#include "fixtures.hpp"

using namespace cgl;
using cgl::testing::error_code;

namespace {

ImagePair uniform_pair(int w, int h, float v) {
  ImagePair p;
  p.rgb = Raster(w, h, 3, v);
  p.thermal = Raster(w, h, 1, v);
  return p;
}

bool all_connected(const SuperpixelMap& map) {
  std::vector<std::size_t> seen_count(map.n, 0);
  std::vector<char> seen(map.labels.size(), 0);
  std::vector<char> started(map.n, 0);
  for (std::size_t p = 0; p < map.labels.size(); ++p) {
    const int l = map.labels[p];
    if (started[l]) continue;
    started[l] = 1;
    std::queue<std::size_t> q;
    q.push(p);
    seen[p] = 1;
    while (!q.empty()) {
      const std::size_t c = q.front();
      q.pop();
      ++seen_count[l];
      const int x = static_cast<int>(c % map.width), y = static_cast<int>(c / map.width);
      const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        const int nx = x + dx[d], ny = y + dy[d];
        if (nx < 0 || ny < 0 || nx >= map.width || ny >= map.height) continue;
        const std::size_t r = static_cast<std::size_t>(ny) * map.width + nx;
        if (!seen[r] && map.labels[r] == l) {
          seen[r] = 1;
          q.push(r);
        }
      }
    }
  }
  for (int l = 0; l < map.n; ++l) {
    if (seen_count[l] != map.sizes[l]) return false;
  }
  return true;
}

Adjacency brute_force_adjacency(const SuperpixelMap& map) {
  Adjacency adj(map.n);
  const int w = map.width;
  const std::size_t np = map.labels.size();
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t q = 0; q < np; ++q) {
      const int px = static_cast<int>(p % w), py = static_cast<int>(p / w);
      const int qx = static_cast<int>(q % w), qy = static_cast<int>(q / w);
      if (std::abs(px - qx) <= 1 && std::abs(py - qy) <= 1 && map.labels[p] != map.labels[q]) {
        adj.connect(map.labels[p], map.labels[q]);
      }
    }
  }
  return adj;
}

}  // namespace

TEST_CASE("uniform image yields a regular grid of tiles") {
  const SuperpixelMap map = slic_segment(uniform_pair(64, 64, 0.5f), {16, 0.0707, 10, 1});
  REQUIRE(map.n == 16);
  std::set<std::pair<int, int>> expected;
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) expected.emplace(i, j);
  }
  for (const auto& c : map.centroids) {
    const int i = static_cast<int>(std::lround((c.x - 7.5) / 16.0));
    const int j = static_cast<int>(std::lround((c.y - 7.5) / 16.0));
    CHECK(std::abs(c.x - (7.5 + 16 * i)) <= 1.0);
    CHECK(std::abs(c.y - (7.5 + 16 * j)) <= 1.0);
    expected.erase({i, j});
  }
  CHECK(expected.empty());
}

TEST_CASE("n_target=300 on 480x640 stays within [150, 450] and labels every pixel") {
  const ImagePair pair = cgl::testing::bright_hot_object(480);
  ImagePair wide;
  wide.rgb = Raster(640, 480, 3);
  wide.thermal = Raster(640, 480, 1);
  for (int y = 0; y < 480; ++y) {
    for (int x = 0; x < 640; ++x) {
      for (int c = 0; c < 3; ++c) wide.rgb.at(x, y, c) = pair.rgb.at(x % 480, y, c);
      wide.thermal.at(x, y) = pair.thermal.at(x % 480, y);
    }
  }
  const SuperpixelMap map = slic_segment(wide, {});
  CHECK(map.n >= 150);
  CHECK(map.n <= 450);
  std::size_t total = 0;
  for (auto s : map.sizes) total += s;
  CHECK(total == 640u * 480u);
  for (int l : map.labels) CHECK((l >= 0 && l < map.n));
}

TEST_CASE("two-tone image: no superpixel spans the tone boundary") {
  ImagePair p = uniform_pair(32, 16, 0.1f);
  for (int y = 0; y < 16; ++y) {
    for (int x = 16; x < 32; ++x) {
      for (int c = 0; c < 3; ++c) p.rgb.at(x, y, c) = 0.9f;
      p.thermal.at(x, y) = 0.9f;
    }
  }
  const SuperpixelMap map = slic_segment(p, {2, 0.0707, 10, 1});
  std::vector<std::set<bool>> tones(map.n);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 32; ++x) tones[map.label(x, y)].insert(x >= 16);
  }
  for (const auto& t : tones) CHECK(t.size() == 1);
}

TEST_CASE("SLIC invariants on random images") {
  for (std::uint32_t seed = 0; seed < 5; ++seed) {
    const ImagePair pair = cgl::testing::random_pair(40, 30, seed);
    const SuperpixelMap map = slic_segment(pair, {25, 0.0707, 10, 1});
    std::size_t total = 0;
    for (auto s : map.sizes) total += s;
    CHECK(total == 1200u);
    CHECK(all_connected(map));
    for (int l = 0; l < map.n; ++l) {
      std::uint8_t flags = 0;
      for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
          if (map.label(x, y) != l) continue;
          if (y == 0) flags |= static_cast<std::uint8_t>(Side::Top);
          if (y == map.height - 1) flags |= static_cast<std::uint8_t>(Side::Bottom);
          if (x == 0) flags |= static_cast<std::uint8_t>(Side::Left);
          if (x == map.width - 1) flags |= static_cast<std::uint8_t>(Side::Right);
        }
      }
      CHECK(flags == map.sides[l]);
    }
  }
}

TEST_CASE("SLIC is deterministic across runs and thread counts") {
  const ImagePair pair = cgl::testing::random_pair(64, 48, 9);
  const SuperpixelMap a = slic_segment(pair, {40, 0.0707, 10, 1});
  const SuperpixelMap b = slic_segment(pair, {40, 0.0707, 10, 1});
  const SuperpixelMap c = slic_segment(pair, {40, 0.0707, 10, 4});
  CHECK(a.labels == b.labels);
  CHECK(a.labels == c.labels);
}

TEST_CASE("slic_segment rejects images that cannot hold the requested count") {
  CHECK(error_code([] { slic_segment(uniform_pair(4, 4, 0.5f), {300, 0.07, 10, 1}); }) ==
        ErrorCode::TooSmall);
  CHECK(error_code([] { slic_segment(uniform_pair(1, 8, 0.5f), {2, 0.07, 10, 1}); }) ==
        ErrorCode::TooSmall);
}

TEST_CASE("adjacency: 2x2 tiles are all mutually adjacent through corners") {
  const Adjacency adj = adjacency(cgl::testing::tile_map(8, 8, 2, 2));
  CHECK(adj.edge_count() == 6);
  for (int i = 0; i < 4; ++i) CHECK_FALSE(adj(i, i));
}

TEST_CASE("adjacency: 1x3 strip connects neighbours only") {
  const Adjacency adj = adjacency(cgl::testing::tile_map(9, 3, 3, 1));
  CHECK(adj(0, 1));
  CHECK(adj(1, 2));
  CHECK_FALSE(adj(0, 2));
  CHECK(adj(1, 0));
}

TEST_CASE("adjacency equals the all-pixel-pairs oracle on random segmentations") {
  for (std::uint32_t seed = 0; seed < 4; ++seed) {
    const SuperpixelMap map = cgl::testing::random_map(24, 20, 12, seed);
    const Adjacency fast = adjacency(map);
    const Adjacency slow = brute_force_adjacency(map);
    for (int i = 0; i < map.n; ++i) {
      for (int j = 0; j < map.n; ++j) CHECK(fast(i, j) == slow(i, j));
    }
  }
}

TEST_CASE("adjacency graph of a segmentation is connected") {
  const SuperpixelMap map = slic_segment(cgl::testing::random_pair(48, 48, 4), {30, 0.07, 10, 1});
  const Adjacency adj = adjacency(map);
  std::vector<char> seen(map.n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 0;
  while (!q.empty()) {
    const int i = q.front();
    q.pop();
    ++count;
    for (int j = 0; j < map.n; ++j) {
      if (adj(i, j) && !seen[j]) {
        seen[j] = 1;
        q.push(j);
      }
    }
  }
  CHECK(count == map.n);
}

TEST_CASE("extended adjacency is a superset joining all boundary superpixels") {
  const SuperpixelMap map = cgl::testing::tile_map(20, 20, 5, 5);
  const Adjacency base = adjacency(map);
  const Adjacency ext = extend_adjacency(base, map);
  for (const auto& [i, j] : base.edges()) CHECK(ext(i, j));
  CHECK(ext(0, 24));   // opposite corners, both on the border
  CHECK(ext(0, 2));    // two hops along the top row
  CHECK(ext.edge_count() > base.edge_count());
}

TEST_CASE("label_image encodes ids mod 256") {
  const SuperpixelMap map = cgl::testing::tile_map(4, 1, 4, 1);
  const Raster img = label_image(map);
  CHECK(img.at(3, 0) == doctest::Approx(3.0 / 255.0));
}
