#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgl/imgcore.hpp"
#include "cgl/superpixel.hpp"

namespace cgl {

/// H x W x C float32 tensor stored in the `CGLTENS1` binary format:
///   bytes 0..7   magic "CGLTENS1"
///   bytes 8..19  height, width, channels as little-endian uint32
///   byte  20     dtype (1 = float32)
///   bytes 21..   row-major HWC little-endian float32 payload
struct Tensor {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<float> data;

  float at(std::uint32_t y, std::uint32_t x, std::uint32_t c) const noexcept {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

inline constexpr std::array<char, 8> kTensorMagic = {'C', 'G', 'L', 'T', 'E', 'N', 'S', '1'};
inline constexpr std::size_t kTensorHeaderBytes = 21;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);
Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& t);

/// Bilinear resize with the align-corners=false (half-pixel) convention.
Tensor resize_bilinear(const Tensor& t, std::uint32_t out_height, std::uint32_t out_width);

/// n x d matrix, row i = feature of superpixel i.
using FeatureMatrix = Eigen::MatrixXd;

/// Mean of each channel over the pixels of every superpixel.
FeatureMatrix color_features(const Raster& channels, const SuperpixelMap& map);

/// Per-column min-max to [0,1]; constant columns map to 0.
void minmax_normalize_columns(FeatureMatrix& features);

/// Resizes (if needed), averages per superpixel, then min-max normalizes.
FeatureMatrix ingest_deep(const Tensor& tensor, const SuperpixelMap& map);
FeatureMatrix ingest_deep(const std::filesystem::path& tensor_path, const SuperpixelMap& map);

enum class Modality : int { Rgb = 0, Thermal = 1 };

const char* modality_tag(Modality m) noexcept;  // "rgb" / "t"

inline constexpr std::array<const char*, 2> kDeepLayers = {"conv1", "conv5"};

/// `<dir>/<id>.<modality>.<layer>.tens`
std::filesystem::path tensor_path(const std::filesystem::path& dir, const std::string& id,
                                  Modality modality, const std::string& layer);

/// vectors[m * K + k] holds the n x d_k features of modality m, layer k.
struct FeatureSet {
  int n = 0;
  int M = 0;
  int K = 0;
  std::vector<Modality> modalities;
  std::vector<FeatureMatrix> vectors;

  const FeatureMatrix& at(int m, int k) const { return vectors.at(static_cast<std::size_t>(m) * K + k); }
  int dim(int m, int k) const { return static_cast<int>(at(m, k).cols()); }
};

/// Paths per modality (rgb, t) and layer (conv1, conv5).
using DeepPaths = std::array<std::array<std::filesystem::path, 2>, 2>;

DeepPaths deep_paths_for(const std::filesystem::path& dir, const std::string& id);

/// Colour-only (K=1) when `deep` is empty, else colour + conv1 + conv5 (K=3).
/// All tensors are read before anything is returned.
FeatureSet assemble(const ImagePair& pair, const SuperpixelMap& map,
                    const std::optional<DeepPaths>& deep = std::nullopt);

/// Keeps only the listed modalities, in the given order.
FeatureSet select_modalities(const FeatureSet& set, const std::vector<Modality>& keep);

}  // namespace cgl
