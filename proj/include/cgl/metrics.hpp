#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cgl/imgcore.hpp"

namespace cgl {

inline constexpr double kDefaultBeta2 = 0.3;

/// Precision/recall at the 256 thresholds t = 0..255. A pixel is retrieved
/// at t when round(255 * saliency) >= t.
struct PRCurve {
  std::array<double, 256> precision{};
  std::array<double, 256> recall{};
};

/// 8-bit quantization used for thresholding: round(255 * v) clamped to [0,255].
int quantize(float v) noexcept;

PRCurve pr_curve(const Raster& saliency, const Raster& gt);

/// (1 + b2) P R / (b2 P + R); 0 when P = R = 0.
double f_measure(double precision, double recall, double beta2 = kDefaultBeta2);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// Adaptive threshold min(2 * mean saliency, 1 - 1e-9).
double adaptive_threshold(const Raster& saliency);

/// P/R/F with pixels retrieved when saliency >= adaptive_threshold.
PRF adaptive_prf(const Raster& saliency, const Raster& gt, double beta2 = kDefaultBeta2);

/// id -> attribute tags, parsed from `id,TAG1;TAG2;...` lines.
using AttributeTable = std::map<std::string, std::vector<std::string>>;

AttributeTable parse_attributes(const std::string& text);
AttributeTable read_attributes(const std::filesystem::path& path);

struct ImageScore {
  std::string id;
  PRF adaptive;
};

struct EvalReport {
  std::vector<ImageScore> images;  // sorted by id
  PRF mean;                        // arithmetic means of per-image values
  PRCurve mean_curve;
  double max_f = 0.0;              // max over the mean curve
  std::map<std::string, PRF> attributes;
  std::map<std::string, int> attribute_counts;
};

struct EvalItem {
  std::string id;
  Raster saliency;
  std::optional<Raster> gt;
};

EvalReport evaluate(const std::vector<EvalItem>& items, const AttributeTable* attributes = nullptr,
                    double beta2 = kDefaultBeta2);

/// Matches maps to dataset pairs by id; every pair needs ground truth.
EvalReport evaluate_dataset(const std::map<std::string, Raster>& maps,
                            const std::vector<ImagePair>& dataset,
                            const AttributeTable* attributes = nullptr,
                            double beta2 = kDefaultBeta2);

void write_report_csv(std::ostream& out, const EvalReport& report);
void write_report_json(std::ostream& out, const EvalReport& report);
void write_pr_csv(std::ostream& out, const PRCurve& curve);

}  // namespace cgl
