#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cgl {

/// Row-major interleaved image with intensities in [0,1].
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, float fill = 0.0f);
  Raster(int width, int height, int channels, std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  float& at(int x, int y, int c = 0) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c = 0) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  const std::vector<float>& data() const noexcept { return data_; }
  std::vector<float>& data() noexcept { return data_; }

  bool same_size(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Copies one channel into a new single-channel raster.
  Raster channel(int c) const;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

struct ImagePair {
  std::string id;
  Raster rgb;      // 3 channels
  Raster thermal;  // 1 channel
  std::optional<Raster> gt;  // 1 channel, values in {0,1}
};

/// Three-channel CIE-LAB image; L/100, (a+128)/255, (b+128)/255.
struct LabRaster {
  Raster lab;
  int width() const noexcept { return lab.width(); }
  int height() const noexcept { return lab.height(); }
};

/// Unscaled LAB triple for one sRGB colour in [0,1]^3.
struct Lab {
  double l, a, b;
};

Lab srgb_to_lab(double r, double g, double b) noexcept;

LabRaster rgb_to_lab(const Raster& rgb);

/// Decodes PNG or JPEG (detected by file signature) to [0,1] floats.
Raster read_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG; values are scaled by 255 and rounded to nearest.
/// Accepts 1 or 3 channel rasters.
void write_png(const std::filesystem::path& path, const Raster& image);

/// Maps every value to 1 if >= 0.5, otherwise 0.
Raster binarize(const Raster& mask);

/// Collapses a 3-channel raster to 1 channel by channel mean.
Raster to_single_channel(const Raster& image);

ImagePair load_pair(const std::filesystem::path& rgb_path,
                    const std::filesystem::path& thermal_path,
                    const std::optional<std::filesystem::path>& gt_path = std::nullopt);

struct PairDescriptor {
  std::string id;
  std::filesystem::path rgb;
  std::filesystem::path thermal;
  std::optional<std::filesystem::path> gt;
};

/// Lists pairs under <root>/RGB and <root>/T matched by stem, with optional
/// <root>/GT masks. Sorted by id.
std::vector<PairDescriptor> scan_dataset(const std::filesystem::path& root);

ImagePair load_pair(const PairDescriptor& desc);

/// Alpha-blends a 1-channel saliency map (as red) over an RGB image.
Raster overlay(const Raster& rgb, const Raster& saliency, float alpha = 0.6f);

}  // namespace cgl
