#include "cgl/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "cgl/error.hpp"

namespace cgl {

int quantize(float v) noexcept {
  // Exact in double: a float times 255 needs at most 32 significant bits.
  return static_cast<int>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0));
}

namespace {

void check_pair(const Raster& saliency, const Raster& gt) {
  if (!saliency.same_size(gt) || saliency.channels() != 1 || gt.channels() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "saliency map and ground truth differ in shape");
  }
}

double precision_of(std::size_t tp, std::size_t retrieved) {
  return retrieved == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(retrieved);
}

}  // namespace

PRCurve pr_curve(const Raster& saliency, const Raster& gt) {
  check_pair(saliency, gt);
  std::array<std::size_t, 256> pos{}, neg{};
  std::size_t positives = 0;
  for (std::size_t p = 0; p < saliency.pixel_count(); ++p) {
    const int q = quantize(saliency.data()[p]);
    if (gt.data()[p] >= 0.5f) {
      ++pos[q];
      ++positives;
    } else {
      ++neg[q];
    }
  }
  if (positives == 0) throw Error(ErrorCode::EmptyGT, "ground truth has no salient pixel");
  PRCurve curve;
  std::size_t tp = 0, fp = 0;
  for (int t = 255; t >= 0; --t) {
    tp += pos[t];
    fp += neg[t];
    curve.precision[t] = precision_of(tp, tp + fp);
    curve.recall[t] = static_cast<double>(tp) / static_cast<double>(positives);
  }
  return curve;
}

double f_measure(double precision, double recall, double beta2) {
  const double denom = beta2 * precision + recall;
  if (denom <= 0.0) return 0.0;
  return (1.0 + beta2) * precision * recall / denom;
}

double adaptive_threshold(const Raster& saliency) {
  double sum = 0.0;
  for (float v : saliency.data()) sum += v;
  const double mean = saliency.empty() ? 0.0 : sum / static_cast<double>(saliency.data().size());
  return std::min(2.0 * mean, 1.0 - 1e-9);
}

PRF adaptive_prf(const Raster& saliency, const Raster& gt, double beta2) {
  check_pair(saliency, gt);
  const double thr = adaptive_threshold(saliency);
  std::size_t tp = 0, retrieved = 0, positives = 0;
  for (std::size_t p = 0; p < saliency.pixel_count(); ++p) {
    const bool hit = saliency.data()[p] >= thr;
    const bool pos = gt.data()[p] >= 0.5f;
    retrieved += hit;
    positives += pos;
    tp += hit && pos;
  }
  if (positives == 0) throw Error(ErrorCode::EmptyGT, "ground truth has no salient pixel");
  PRF out;
  out.precision = precision_of(tp, retrieved);
  out.recall = static_cast<double>(tp) / static_cast<double>(positives);
  out.f = f_measure(out.precision, out.recall, beta2);
  return out;
}

AttributeTable parse_attributes(const std::string& text) {
  AttributeTable table;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::Format, "attribute line without comma: " + line);
    }
    const std::string id = line.substr(0, comma);
    if (id == "id") continue;  // header
    auto& tags = table[id];
    std::istringstream rest(line.substr(comma + 1));
    std::string tag;
    while (std::getline(rest, tag, ';')) {
      tag.erase(std::remove_if(tag.begin(), tag.end(), ::isspace), tag.end());
      if (!tag.empty()) tags.push_back(tag);
    }
  }
  return table;
}

AttributeTable read_attributes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read attribute file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_attributes(buf.str());
}

EvalReport evaluate(const std::vector<EvalItem>& items, const AttributeTable* attributes,
                    double beta2) {
  std::vector<const EvalItem*> order;
  for (const auto& item : items) order.push_back(&item);
  std::sort(order.begin(), order.end(),
            [](const EvalItem* a, const EvalItem* b) { return a->id < b->id; });

  EvalReport report;
  std::map<std::string, PRF> attr_sum;
  for (const EvalItem* item : order) {
    if (!item->gt) throw Error(ErrorCode::MissingGT, "no ground truth for " + item->id);
    ImageScore score{item->id, adaptive_prf(item->saliency, *item->gt, beta2)};
    const PRCurve curve = pr_curve(item->saliency, *item->gt);
    for (int t = 0; t < 256; ++t) {
      report.mean_curve.precision[t] += curve.precision[t];
      report.mean_curve.recall[t] += curve.recall[t];
    }
    report.mean.precision += score.adaptive.precision;
    report.mean.recall += score.adaptive.recall;
    report.mean.f += score.adaptive.f;
    if (attributes) {
      if (auto it = attributes->find(item->id); it != attributes->end()) {
        for (const auto& tag : std::set<std::string>(it->second.begin(), it->second.end())) {
          auto& acc = attr_sum[tag];
          acc.precision += score.adaptive.precision;
          acc.recall += score.adaptive.recall;
          acc.f += score.adaptive.f;
          ++report.attribute_counts[tag];
        }
      }
    }
    report.images.push_back(std::move(score));
  }
  const double count = static_cast<double>(report.images.size());
  if (count > 0) {
    report.mean.precision /= count;
    report.mean.recall /= count;
    report.mean.f /= count;
    for (int t = 0; t < 256; ++t) {
      report.mean_curve.precision[t] /= count;
      report.mean_curve.recall[t] /= count;
      report.max_f = std::max(report.max_f, f_measure(report.mean_curve.precision[t],
                                                      report.mean_curve.recall[t], beta2));
    }
  }
  for (const auto& [tag, acc] : attr_sum) {
    const double c = report.attribute_counts[tag];
    report.attributes[tag] = {acc.precision / c, acc.recall / c, acc.f / c};
  }
  return report;
}

EvalReport evaluate_dataset(const std::map<std::string, Raster>& maps,
                            const std::vector<ImagePair>& dataset,
                            const AttributeTable* attributes, double beta2) {
  std::vector<EvalItem> items;
  std::set<std::string> ids;
  for (const auto& pair : dataset) {
    auto it = maps.find(pair.id);
    if (it == maps.end()) throw Error(ErrorCode::IdMismatch, "no saliency map for " + pair.id);
    if (!pair.gt) throw Error(ErrorCode::MissingGT, "no ground truth for " + pair.id);
    items.push_back({pair.id, it->second, pair.gt});
    ids.insert(pair.id);
  }
  for (const auto& [id, map] : maps) {
    if (!ids.count(id)) throw Error(ErrorCode::IdMismatch, "saliency map without pair: " + id);
  }
  return evaluate(items, attributes, beta2);
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << std::fixed << std::setprecision(6);
  out << "id,precision,recall,f_measure\n";
  for (const auto& img : report.images) {
    out << img.id << ',' << img.adaptive.precision << ',' << img.adaptive.recall << ','
        << img.adaptive.f << '\n';
  }
  out << "MEAN," << report.mean.precision << ',' << report.mean.recall << ',' << report.mean.f
      << '\n';
  out << "MAX_F_CURVE,,," << report.max_f << '\n';
  for (const auto& [tag, prf] : report.attributes) {
    out << "ATTR:" << tag << ',' << prf.precision << ',' << prf.recall << ',' << prf.f << '\n';
  }
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  nlohmann::ordered_json j;
  j["images"] = report.images.size();
  j["mean"] = {{"precision", report.mean.precision},
               {"recall", report.mean.recall},
               {"f_measure", report.mean.f}};
  j["max_f_curve"] = report.max_f;
  nlohmann::ordered_json attrs = nlohmann::ordered_json::object();
  for (const auto& [tag, prf] : report.attributes) {
    attrs[tag] = {{"count", report.attribute_counts.at(tag)},
                  {"precision", prf.precision},
                  {"recall", prf.recall},
                  {"f_measure", prf.f}};
  }
  j["attributes"] = attrs;
  out << j.dump(2) << '\n';
}

void write_pr_csv(std::ostream& out, const PRCurve& curve) {
  out << std::fixed << std::setprecision(6) << "threshold,precision,recall\n";
  for (int t = 0; t < 256; ++t) {
    out << t << ',' << curve.precision[t] << ',' << curve.recall[t] << '\n';
  }
}

}  // namespace cgl
