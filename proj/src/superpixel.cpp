#include "cgl/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "cgl/error.hpp"

namespace cgl {

const char* to_string(Side side) noexcept {
  switch (side) {
    case Side::Top: return "top";
    case Side::Bottom: return "bottom";
    case Side::Left: return "left";
    case Side::Right: return "right";
  }
  return "?";
}

SuperpixelMap make_superpixel_map(int width, int height, std::vector<int> labels) {
  if (labels.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::DimensionMismatch, "label raster size mismatch");
  }
  SuperpixelMap map;
  map.width = width;
  map.height = height;
  int max_label = -1;
  for (int l : labels) {
    if (l < 0) throw Error(ErrorCode::InvalidArgument, "negative superpixel label");
    max_label = std::max(max_label, l);
  }
  map.n = max_label + 1;
  map.labels = std::move(labels);
  map.sizes.assign(map.n, 0);
  map.sides.assign(map.n, 0);
  std::vector<double> sx(map.n, 0.0), sy(map.n, 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int l = map.labels[static_cast<std::size_t>(y) * width + x];
      ++map.sizes[l];
      sx[l] += x;
      sy[l] += y;
      std::uint8_t flags = 0;
      if (y == 0) flags |= static_cast<std::uint8_t>(Side::Top);
      if (y == height - 1) flags |= static_cast<std::uint8_t>(Side::Bottom);
      if (x == 0) flags |= static_cast<std::uint8_t>(Side::Left);
      if (x == width - 1) flags |= static_cast<std::uint8_t>(Side::Right);
      map.sides[l] |= flags;
    }
  }
  map.centroids.resize(map.n);
  for (int l = 0; l < map.n; ++l) {
    if (map.sizes[l] == 0) {
      throw Error(ErrorCode::InvalidArgument, "superpixel labels are not contiguous");
    }
    map.centroids[l] = {sx[l] / map.sizes[l], sy[l] / map.sizes[l]};
  }
  return map;
}

namespace {

struct Cluster {
  std::vector<double> feat;
  double x = 0.0;
  double y = 0.0;
};

// Each fragment that is not the largest 4-connected piece of its label is
// merged into the neighbouring label sharing the most boundary edges.
std::vector<int> enforce_connectivity(int width, int height, const std::vector<int>& labels) {
  const std::size_t npix = labels.size();
  std::vector<int> comp(npix, -1);
  std::vector<int> comp_label;
  std::vector<std::size_t> comp_size;
  std::vector<std::size_t> stack;
  for (std::size_t p = 0; p < npix; ++p) {
    if (comp[p] >= 0) continue;
    const int id = static_cast<int>(comp_label.size());
    const int l = labels[p];
    comp_label.push_back(l);
    comp_size.push_back(0);
    comp[p] = id;
    stack.push_back(p);
    while (!stack.empty()) {
      const std::size_t q = stack.back();
      stack.pop_back();
      ++comp_size[id];
      const int x = static_cast<int>(q % width);
      const int y = static_cast<int>(q / width);
      const auto visit = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) return;
        const std::size_t r = static_cast<std::size_t>(ny) * width + nx;
        if (comp[r] < 0 && labels[r] == l) {
          comp[r] = id;
          stack.push_back(r);
        }
      };
      visit(x + 1, y);
      visit(x - 1, y);
      visit(x, y + 1);
      visit(x, y - 1);
    }
  }

  const int ncomp = static_cast<int>(comp_label.size());
  std::map<int, int> main_of_label;
  for (int c = 0; c < ncomp; ++c) {
    auto [it, inserted] = main_of_label.emplace(comp_label[c], c);
    if (!inserted && comp_size[c] > comp_size[it->second]) it->second = c;
  }
  if (static_cast<int>(main_of_label.size()) == ncomp) return labels;

  // Shared 4-neighbour boundary edge counts between components.
  std::vector<std::map<int, int>> shared(ncomp);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * width + x;
      if (x + 1 < width && comp[p + 1] != comp[p]) {
        ++shared[comp[p]][comp[p + 1]];
        ++shared[comp[p + 1]][comp[p]];
      }
      if (y + 1 < height && comp[p + width] != comp[p]) {
        ++shared[comp[p]][comp[p + width]];
        ++shared[comp[p + width]][comp[p]];
      }
    }
  }

  std::vector<int> resolved(ncomp, -1);
  for (const auto& [l, c] : main_of_label) resolved[c] = l;
  bool pending = true;
  while (pending) {
    pending = false;
    bool progress = false;
    for (int c = 0; c < ncomp; ++c) {
      if (resolved[c] >= 0) continue;
      std::map<int, int> votes;
      for (const auto& [d, count] : shared[c]) {
        if (resolved[d] >= 0) votes[resolved[d]] += count;
      }
      if (votes.empty()) {
        pending = true;
        continue;
      }
      // std::map iterates labels ascending, so strict > keeps the lower id on ties.
      int best = -1, best_count = -1;
      for (const auto& [l, count] : votes) {
        if (count > best_count) {
          best = l;
          best_count = count;
        }
      }
      resolved[c] = best;
      progress = true;
    }
    if (pending && !progress) {
      throw Error(ErrorCode::InvalidArgument, "connectivity enforcement stalled");
    }
  }

  std::vector<int> out(npix);
  for (std::size_t p = 0; p < npix; ++p) out[p] = resolved[comp[p]];
  return out;
}

std::vector<int> relabel_by_first_appearance(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t p = 0; p < labels.size(); ++p) {
    auto [it, inserted] = remap.emplace(labels[p], static_cast<int>(remap.size()));
    out[p] = it->second;
  }
  return out;
}

}  // namespace

SuperpixelMap slic_segment(const Raster& features, const SlicOptions& options) {
  const int width = features.width();
  const int height = features.height();
  const int nc = features.channels();
  if (options.n_target < 1) {
    throw Error(ErrorCode::InvalidArgument, "n_target must be positive");
  }
  if (options.max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_iters must be positive");
  }
  if (width < 2 || height < 2) {
    throw Error(ErrorCode::TooSmall, "image must be at least 2x2");
  }
  const double npix = static_cast<double>(width) * height;
  const double step = std::sqrt(npix / options.n_target);
  if (step < 1.0) {
    throw Error(ErrorCode::TooSmall, std::to_string(width) + "x" + std::to_string(height) +
                                         " image cannot hold " +
                                         std::to_string(options.n_target) + " superpixels");
  }
  const int gx = std::max(1, static_cast<int>(std::lround(width / step)));
  const int gy = std::max(1, static_cast<int>(std::lround(height / step)));
  const auto& data = features.data();

  std::vector<Cluster> clusters;
  clusters.reserve(static_cast<std::size_t>(gx) * gy);
  for (int j = 0; j < gy; ++j) {
    for (int i = 0; i < gx; ++i) {
      Cluster c;
      c.x = (i + 0.5) * width / gx;
      c.y = (j + 0.5) * height / gy;
      const int px = std::min(width - 1, static_cast<int>(c.x));
      const int py = std::min(height - 1, static_cast<int>(c.y));
      const std::size_t base = (static_cast<std::size_t>(py) * width + px) * nc;
      c.feat.assign(data.begin() + base, data.begin() + base + nc);
      clusters.push_back(std::move(c));
    }
  }
  const int k = static_cast<int>(clusters.size());
  const double spatial = (options.compactness / step) * (options.compactness / step);
  const std::size_t npx = static_cast<std::size_t>(width) * height;
  std::vector<int> labels(npx, 0);

  const int bw = static_cast<int>(std::ceil(width / step)) + 1;
  const int bh = static_cast<int>(std::ceil(height / step)) + 1;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    // Bucket clusters by position so each pixel only scans nearby centres.
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(bw) * bh);
    for (int c = 0; c < k; ++c) {
      const int bx = std::clamp(static_cast<int>(clusters[c].x / step), 0, bw - 1);
      const int by = std::clamp(static_cast<int>(clusters[c].y / step), 0, bh - 1);
      buckets[static_cast<std::size_t>(by) * bw + bx].push_back(c);
    }

    const auto distance = [&](std::size_t p, int x, int y, int c) {
      const Cluster& cl = clusters[c];
      double d = 0.0;
      for (int ch = 0; ch < nc; ++ch) {
        const double diff = data[p * nc + ch] - cl.feat[ch];
        d += diff * diff;
      }
      const double dx = x - cl.x;
      const double dy = y - cl.y;
      return d + spatial * (dx * dx + dy * dy);
    };

    const auto assign_rows = [&](int y0, int y1) {
      for (int y = y0; y < y1; ++y) {
        const int by0 = std::max(0, static_cast<int>((y - step) / step));
        const int by1 = std::min(bh - 1, static_cast<int>((y + step) / step));
        for (int x = 0; x < width; ++x) {
          const std::size_t p = static_cast<std::size_t>(y) * width + x;
          const int bx0 = std::max(0, static_cast<int>((x - step) / step));
          const int bx1 = std::min(bw - 1, static_cast<int>((x + step) / step));
          double best = std::numeric_limits<double>::infinity();
          int best_c = -1;
          for (int by = by0; by <= by1; ++by) {
            for (int bx = bx0; bx <= bx1; ++bx) {
              for (int c : buckets[static_cast<std::size_t>(by) * bw + bx]) {
                if (std::abs(x - clusters[c].x) > step || std::abs(y - clusters[c].y) > step) {
                  continue;
                }
                const double d = distance(p, x, y, c);
                if (d < best || (d == best && c < best_c)) {
                  best = d;
                  best_c = c;
                }
              }
            }
          }
          if (best_c < 0) {
            for (int c = 0; c < k; ++c) {
              const double d = distance(p, x, y, c);
              if (d < best) {
                best = d;
                best_c = c;
              }
            }
          }
          labels[p] = best_c;
        }
      }
    };

    const int threads = std::clamp(options.threads, 1, height);
    if (threads == 1) {
      assign_rows(0, height);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back(assign_rows, height * t / threads, height * (t + 1) / threads);
      }
      for (auto& th : pool) th.join();
    }

    std::vector<double> sums(static_cast<std::size_t>(k) * (nc + 2), 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * width + x;
        const int c = labels[p];
        double* s = &sums[static_cast<std::size_t>(c) * (nc + 2)];
        for (int ch = 0; ch < nc; ++ch) s[ch] += data[p * nc + ch];
        s[nc] += x;
        s[nc + 1] += y;
        ++counts[c];
      }
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      const double* s = &sums[static_cast<std::size_t>(c) * (nc + 2)];
      const double inv = 1.0 / static_cast<double>(counts[c]);
      for (int ch = 0; ch < nc; ++ch) clusters[c].feat[ch] = s[ch] * inv;
      const double nx = s[nc] * inv;
      const double ny = s[nc + 1] * inv;
      shift = std::max(shift, std::abs(nx - clusters[c].x) + std::abs(ny - clusters[c].y));
      clusters[c].x = nx;
      clusters[c].y = ny;
    }
    if (shift == 0.0) break;
  }

  auto connected = enforce_connectivity(width, height, labels);
  return make_superpixel_map(width, height, relabel_by_first_appearance(connected));
}

SuperpixelMap slic_segment(const ImagePair& pair, const SlicOptions& options) {
  if (!pair.rgb.same_size(pair.thermal)) {
    throw Error(ErrorCode::DimensionMismatch, "rgb and thermal sizes differ");
  }
  const LabRaster lab = rgb_to_lab(pair.rgb);
  Raster joint(pair.rgb.width(), pair.rgb.height(), 4);
  const std::size_t n = pair.rgb.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    joint.data()[4 * i] = lab.lab.data()[3 * i];
    joint.data()[4 * i + 1] = lab.lab.data()[3 * i + 1];
    joint.data()[4 * i + 2] = lab.lab.data()[3 * i + 2];
    joint.data()[4 * i + 3] = pair.thermal.data()[i];
  }
  return slic_segment(joint, options);
}

void Adjacency::connect(int i, int j) {
  if (i == j) return;
  dense_[static_cast<std::size_t>(i) * n_ + j] = 1;
  dense_[static_cast<std::size_t>(j) * n_ + i] = 1;
}

std::vector<std::pair<int, int>> Adjacency::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      if ((*this)(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t Adjacency::edge_count() const {
  std::size_t count = 0;
  for (auto v : dense_) count += v;
  return count / 2;
}

Adjacency adjacency(const SuperpixelMap& map) {
  Adjacency adj(map.n);
  const int w = map.width;
  const int h = map.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int l = map.label(x, y);
      if (x + 1 < w) adj.connect(l, map.label(x + 1, y));
      if (y + 1 < h) {
        adj.connect(l, map.label(x, y + 1));
        if (x + 1 < w) adj.connect(l, map.label(x + 1, y + 1));
        if (x > 0) adj.connect(l, map.label(x - 1, y + 1));
      }
    }
  }
  return adj;
}

Adjacency extend_adjacency(const Adjacency& base, const SuperpixelMap& map) {
  const int n = base.size();
  Adjacency out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!base(i, j)) continue;
      out.connect(i, j);
      for (int k = 0; k < n; ++k) {
        if (base(j, k)) out.connect(i, k);
      }
    }
  }
  std::vector<int> boundary;
  for (int i = 0; i < n; ++i) {
    if (map.sides[i] != 0) boundary.push_back(i);
  }
  for (std::size_t a = 0; a < boundary.size(); ++a) {
    for (std::size_t b = a + 1; b < boundary.size(); ++b) out.connect(boundary[a], boundary[b]);
  }
  return out;
}

Raster label_image(const SuperpixelMap& map) {
  Raster out(map.width, map.height, 1);
  for (std::size_t p = 0; p < map.labels.size(); ++p) {
    out.data()[p] = static_cast<float>(map.labels[p] % 256) / 255.0f;
  }
  return out;
}

}  // namespace cgl
