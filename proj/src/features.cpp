#include "cgl/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cgl/error.hpp"

namespace cgl {

namespace fs = std::filesystem;

namespace {

static_assert(sizeof(float) == 4);

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  const std::size_t count = static_cast<std::size_t>(t.height) * t.width * t.channels;
  if (t.data.size() != count) {
    throw Error(ErrorCode::Format, "tensor payload does not match its shape");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kTensorHeaderBytes + 4 * count);
  out.insert(out.end(), kTensorMagic.begin(), kTensorMagic.end());
  put_u32(out, t.height);
  put_u32(out, t.width);
  put_u32(out, t.channels);
  out.push_back(1);
  for (float v : t.data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "tensor holds NaN or infinity");
    put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kTensorHeaderBytes ||
      !std::equal(kTensorMagic.begin(), kTensorMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::Format, "bad tensor magic");
  }
  Tensor t;
  t.height = get_u32(bytes.data() + 8);
  t.width = get_u32(bytes.data() + 12);
  t.channels = get_u32(bytes.data() + 16);
  if (bytes[20] != 1) {
    throw Error(ErrorCode::Format, "unsupported tensor dtype " + std::to_string(bytes[20]));
  }
  const std::size_t count = static_cast<std::size_t>(t.height) * t.width * t.channels;
  if (bytes.size() != kTensorHeaderBytes + 4 * count) {
    throw Error(ErrorCode::Format, "tensor length " + std::to_string(bytes.size()) +
                                       " does not match header (expected " +
                                       std::to_string(kTensorHeaderBytes + 4 * count) + ")");
  }
  t.data.resize(count);
  const std::uint8_t* p = bytes.data() + kTensorHeaderBytes;
  for (std::size_t i = 0; i < count; ++i, p += 4) {
    const float v = std::bit_cast<float>(get_u32(p));
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "tensor holds NaN or infinity");
    t.data[i] = v;
  }
  return t;
}

Tensor read_tensor(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open tensor file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_tensor(const fs::path& path, const Tensor& t) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write tensor file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

namespace {

struct Tap {
  std::uint32_t i0, i1;
  double w1;  // weight of i1
};

std::vector<Tap> bilinear_taps(std::uint32_t in, std::uint32_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (std::uint32_t o = 0; o < out; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    auto i0 = static_cast<std::uint32_t>(src);
    if (i0 > in - 1) i0 = in - 1;
    const std::uint32_t i1 = std::min(i0 + 1, in - 1);
    taps[o] = {i0, i1, src - i0};
  }
  return taps;
}

}  // namespace

Tensor resize_bilinear(const Tensor& t, std::uint32_t out_height, std::uint32_t out_width) {
  if (t.height == 0 || t.width == 0 || out_height == 0 || out_width == 0) {
    throw Error(ErrorCode::InvalidArgument, "cannot resize an empty tensor");
  }
  if (t.height == out_height && t.width == out_width) return t;
  const auto ty = bilinear_taps(t.height, out_height);
  const auto tx = bilinear_taps(t.width, out_width);
  Tensor out{out_height, out_width, t.channels, {}};
  out.data.resize(static_cast<std::size_t>(out_height) * out_width * t.channels);
  for (std::uint32_t y = 0; y < out_height; ++y) {
    const Tap& a = ty[y];
    for (std::uint32_t x = 0; x < out_width; ++x) {
      const Tap& b = tx[x];
      float* dst = &out.data[(static_cast<std::size_t>(y) * out_width + x) * t.channels];
      for (std::uint32_t c = 0; c < t.channels; ++c) {
        const double top = (1.0 - b.w1) * t.at(a.i0, b.i0, c) + b.w1 * t.at(a.i0, b.i1, c);
        const double bot = (1.0 - b.w1) * t.at(a.i1, b.i0, c) + b.w1 * t.at(a.i1, b.i1, c);
        dst[c] = static_cast<float>((1.0 - a.w1) * top + a.w1 * bot);
      }
    }
  }
  return out;
}

FeatureMatrix color_features(const Raster& channels, const SuperpixelMap& map) {
  if (channels.width() != map.width || channels.height() != map.height) {
    throw Error(ErrorCode::DimensionMismatch, "feature raster and superpixel map differ in size");
  }
  const int nc = channels.channels();
  FeatureMatrix out = FeatureMatrix::Zero(map.n, nc);
  const auto& data = channels.data();
  for (std::size_t p = 0; p < map.labels.size(); ++p) {
    const int l = map.labels[p];
    for (int c = 0; c < nc; ++c) out(l, c) += data[p * nc + c];
  }
  for (int l = 0; l < map.n; ++l) out.row(l) /= static_cast<double>(map.sizes[l]);
  return out;
}

void minmax_normalize_columns(FeatureMatrix& features) {
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    auto col = features.col(c);
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    if (hi > lo) {
      col = (col.array() - lo) / (hi - lo);
    } else {
      col.setZero();
    }
  }
}

FeatureMatrix ingest_deep(const Tensor& tensor, const SuperpixelMap& map) {
  if (tensor.channels == 0) throw Error(ErrorCode::Format, "tensor has no channels");
  const Tensor resized = resize_bilinear(tensor, static_cast<std::uint32_t>(map.height),
                                         static_cast<std::uint32_t>(map.width));
  const int nc = static_cast<int>(resized.channels);
  FeatureMatrix out = FeatureMatrix::Zero(map.n, nc);
  for (std::size_t p = 0; p < map.labels.size(); ++p) {
    const int l = map.labels[p];
    const float* src = &resized.data[p * nc];
    for (int c = 0; c < nc; ++c) out(l, c) += src[c];
  }
  for (int l = 0; l < map.n; ++l) out.row(l) /= static_cast<double>(map.sizes[l]);
  minmax_normalize_columns(out);
  return out;
}

FeatureMatrix ingest_deep(const fs::path& tensor_path, const SuperpixelMap& map) {
  return ingest_deep(read_tensor(tensor_path), map);
}

const char* modality_tag(Modality m) noexcept { return m == Modality::Rgb ? "rgb" : "t"; }

fs::path tensor_path(const fs::path& dir, const std::string& id, Modality modality,
                     const std::string& layer) {
  return dir / (id + "." + modality_tag(modality) + "." + layer + ".tens");
}

DeepPaths deep_paths_for(const fs::path& dir, const std::string& id) {
  DeepPaths paths;
  for (int m = 0; m < 2; ++m) {
    for (std::size_t l = 0; l < kDeepLayers.size(); ++l) {
      paths[m][l] = tensor_path(dir, id, static_cast<Modality>(m), kDeepLayers[l]);
    }
  }
  return paths;
}

FeatureSet assemble(const ImagePair& pair, const SuperpixelMap& map,
                    const std::optional<DeepPaths>& deep) {
  FeatureSet set;
  set.n = map.n;
  set.M = 2;
  set.K = deep ? 3 : 1;
  set.modalities = {Modality::Rgb, Modality::Thermal};
  set.vectors.reserve(static_cast<std::size_t>(set.M) * set.K);
  for (int m = 0; m < set.M; ++m) {
    if (m == 0) {
      set.vectors.push_back(color_features(rgb_to_lab(pair.rgb).lab, map));
    } else {
      set.vectors.push_back(color_features(pair.thermal, map));
    }
    if (deep) {
      for (std::size_t l = 0; l < kDeepLayers.size(); ++l) {
        set.vectors.push_back(ingest_deep((*deep)[m][l], map));
      }
    }
  }
  return set;
}

FeatureSet select_modalities(const FeatureSet& set, const std::vector<Modality>& keep) {
  if (keep.empty()) throw Error(ErrorCode::InvalidArgument, "no modality selected");
  FeatureSet out;
  out.n = set.n;
  out.K = set.K;
  for (Modality want : keep) {
    auto it = std::find(set.modalities.begin(), set.modalities.end(), want);
    if (it == set.modalities.end()) {
      throw Error(ErrorCode::InvalidArgument, std::string("modality not present: ") +
                                                  modality_tag(want));
    }
    const int m = static_cast<int>(it - set.modalities.begin());
    out.modalities.push_back(want);
    for (int k = 0; k < set.K; ++k) out.vectors.push_back(set.at(m, k));
  }
  out.M = static_cast<int>(out.modalities.size());
  return out;
}

}  // namespace cgl
