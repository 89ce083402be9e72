#include "cgl/imgcore.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>

#include <jpeglib.h>

#include "cgl/error.hpp"

namespace cgl {

namespace fs = std::filesystem;

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Decode: return "DecodeError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Channel: return "ChannelError";
    case ErrorCode::Layout: return "LayoutError";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::Format: return "FormatError";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DegenerateTrace: return "DegenerateTrace";
    case ErrorCode::NoBoundary: return "NoBoundary";
    case ErrorCode::EmptyGT: return "EmptyGT";
    case ErrorCode::MissingGT: return "MissingGT";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "IoError";
  }
  return "Error";
}

Raster::Raster(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels),
      data_(static_cast<std::size_t>(width) * height * channels, fill) {
  if (width < 0 || height < 0 || channels < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative raster dimension");
  }
}

Raster::Raster(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorCode::DimensionMismatch, "raster data length does not match dimensions");
  }
}

Raster Raster::channel(int c) const {
  if (c < 0 || c >= channels_) {
    throw Error(ErrorCode::Channel, "channel index out of range");
  }
  Raster out(width_, height_, 1);
  const std::size_t n = pixel_count();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = data_[i * channels_ + c];
  return out;
}

// ---------------------------------------------------------------------------
// Colour

namespace {

double srgb_linearize(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

// D65 reference white.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.00000;
constexpr double kZn = 1.08883;

}  // namespace

Lab srgb_to_lab(double r, double g, double b) noexcept {
  const double rl = srgb_linearize(r);
  const double gl = srgb_linearize(g);
  const double bl = srgb_linearize(b);
  const double x = 0.412453 * rl + 0.357580 * gl + 0.180423 * bl;
  const double y = 0.212671 * rl + 0.715160 * gl + 0.072169 * bl;
  const double z = 0.019334 * rl + 0.119193 * gl + 0.950227 * bl;
  const double fx = lab_f(x / kXn);
  const double fy = lab_f(y / kYn);
  const double fz = lab_f(z / kZn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

LabRaster rgb_to_lab(const Raster& rgb) {
  if (rgb.channels() != 3) {
    throw Error(ErrorCode::Channel, "rgb_to_lab expects 3 channels, got " +
                                        std::to_string(rgb.channels()));
  }
  Raster lab(rgb.width(), rgb.height(), 3);
  const auto& src = rgb.data();
  auto& dst = lab.data();
  const std::size_t n = rgb.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const Lab v = srgb_to_lab(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
    dst[3 * i] = static_cast<float>(std::clamp(v.l / 100.0, 0.0, 1.0));
    dst[3 * i + 1] = static_cast<float>(std::clamp((v.a + 128.0) / 255.0, 0.0, 1.0));
    dst[3 * i + 2] = static_cast<float>(std::clamp((v.b + 128.0) / 255.0, 0.0, 1.0));
  }
  return {std::move(lab)};
}

// ---------------------------------------------------------------------------
// Codecs

namespace {

Raster from_bytes(int w, int h, int c, const std::vector<unsigned char>& bytes) {
  std::vector<float> data(bytes.size());
  std::transform(bytes.begin(), bytes.end(), data.begin(),
                 [](unsigned char v) { return static_cast<float>(v) / 255.0f; });
  return Raster(w, h, c, std::move(data));
}

Raster read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::Decode, path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::Decode, path.string() + ": " + msg);
  }
  return from_bytes(static_cast<int>(image.width), static_cast<int>(image.height), channels,
                    buffer);
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};

Raster read_jpeg(const fs::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorCode::Decode, path.string() + ": cannot open");

  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  // Locals touched after setjmp must not live in registers.
  std::vector<unsigned char> buffer;
  int width = 0, height = 0, channels = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::Decode, path.string() + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  channels = cinfo.output_components;
  buffer.resize(static_cast<std::size_t>(width) * height * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    unsigned char* row =
        buffer.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_bytes(width, height, channels, buffer);
}

}  // namespace

Raster read_image(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Decode, path.string() + ": cannot open");
  std::array<unsigned char, 8> sig{};
  in.read(reinterpret_cast<char*>(sig.data()), sig.size());
  if (in.gcount() >= 8 && png_sig_cmp(sig.data(), 0, 8) == 0) return read_png(path);
  if (in.gcount() >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) {
    return read_jpeg(path);
  }
  throw Error(ErrorCode::Decode, path.string() + ": not a PNG or JPEG file");
}

void write_png(const fs::path& path, const Raster& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw Error(ErrorCode::Channel, "write_png supports 1 or 3 channels");
  }
  std::vector<unsigned char> bytes(image.data().size());
  std::transform(image.data().begin(), image.data().end(), bytes.begin(), [](float v) {
    return static_cast<unsigned char>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0));
  });
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, path.string() + ": " + png.message);
  }
}

Raster binarize(const Raster& mask) {
  Raster out = mask;
  for (auto& v : out.data()) v = v >= 0.5f ? 1.0f : 0.0f;
  return out;
}

Raster to_single_channel(const Raster& image) {
  if (image.channels() == 1) return image;
  if (image.channels() != 3) {
    throw Error(ErrorCode::Channel, "expected 1 or 3 channels");
  }
  Raster out(image.width(), image.height(), 1);
  const auto& src = image.data();
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    out.data()[i] = (src[3 * i] + src[3 * i + 1] + src[3 * i + 2]) / 3.0f;
  }
  return out;
}

ImagePair load_pair(const fs::path& rgb_path, const fs::path& thermal_path,
                    const std::optional<fs::path>& gt_path) {
  ImagePair pair;
  pair.id = rgb_path.stem().string();
  pair.rgb = read_image(rgb_path);
  if (pair.rgb.channels() == 1) {
    // Grayscale visible images are promoted so LAB conversion applies uniformly.
    Raster promoted(pair.rgb.width(), pair.rgb.height(), 3);
    for (std::size_t i = 0; i < pair.rgb.pixel_count(); ++i) {
      for (int c = 0; c < 3; ++c) promoted.data()[3 * i + c] = pair.rgb.data()[i];
    }
    pair.rgb = std::move(promoted);
  }
  pair.thermal = to_single_channel(read_image(thermal_path));
  if (!pair.rgb.same_size(pair.thermal)) {
    throw Error(ErrorCode::DimensionMismatch,
                "rgb " + std::to_string(pair.rgb.width()) + "x" +
                    std::to_string(pair.rgb.height()) + " vs thermal " +
                    std::to_string(pair.thermal.width()) + "x" +
                    std::to_string(pair.thermal.height()));
  }
  if (gt_path) {
    Raster gt = binarize(to_single_channel(read_image(*gt_path)));
    if (!gt.same_size(pair.rgb)) {
      throw Error(ErrorCode::DimensionMismatch, "ground truth size differs from image");
    }
    pair.gt = std::move(gt);
  }
  return pair;
}

ImagePair load_pair(const PairDescriptor& desc) {
  ImagePair pair = load_pair(desc.rgb, desc.thermal, desc.gt);
  pair.id = desc.id;
  return pair;
}

namespace {

bool is_image_ext(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

std::map<std::string, fs::path> index_by_stem(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_image_ext(entry.path())) continue;
    // First path in sorted order wins when two extensions share a stem.
    auto [it, inserted] = out.emplace(entry.path().stem().string(), entry.path());
    if (!inserted && entry.path() < it->second) it->second = entry.path();
  }
  return out;
}

}  // namespace

std::vector<PairDescriptor> scan_dataset(const fs::path& root) {
  const fs::path rgb_dir = root / "RGB";
  const fs::path t_dir = root / "T";
  const fs::path gt_dir = root / "GT";
  if (!fs::is_directory(rgb_dir) || !fs::is_directory(t_dir)) {
    throw Error(ErrorCode::Layout, root.string() + ": expected RGB/ and T/ subdirectories");
  }
  const auto rgb = index_by_stem(rgb_dir);
  const auto thermal = index_by_stem(t_dir);
  const auto gt = fs::is_directory(gt_dir) ? index_by_stem(gt_dir)
                                           : std::map<std::string, fs::path>{};
  std::vector<PairDescriptor> out;
  for (const auto& [stem, path] : rgb) {
    auto t = thermal.find(stem);
    if (t == thermal.end()) continue;
    PairDescriptor d{stem, path, t->second, std::nullopt};
    if (auto g = gt.find(stem); g != gt.end()) d.gt = g->second;
    out.push_back(std::move(d));
  }
  return out;
}

Raster overlay(const Raster& rgb, const Raster& saliency, float alpha) {
  if (rgb.channels() != 3 || saliency.channels() != 1 || !rgb.same_size(saliency)) {
    throw Error(ErrorCode::DimensionMismatch, "overlay expects RGB image and matching map");
  }
  Raster out = rgb;
  for (std::size_t i = 0; i < rgb.pixel_count(); ++i) {
    const float a = alpha * saliency.data()[i];
    out.data()[3 * i] = (1.0f - a) * rgb.data()[3 * i] + a;
    out.data()[3 * i + 1] = (1.0f - a) * rgb.data()[3 * i + 1];
    out.data()[3 * i + 2] = (1.0f - a) * rgb.data()[3 * i + 2];
  }
  return out;
}

}  // namespace cgl
