#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cgl/config.hpp"
#include "cgl/error.hpp"
#include "cgl/metrics.hpp"
#include "cgl/ranking.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

/// Config file (from --config or CGL_CONFIG) with per-key flag overrides.
class ConfigOptions {
 public:
  void attach(CLI::App& app) {
    app.add_option("--config", config_file_, "Config file (default: $CGL_CONFIG)");
    for (const auto& key : cgl::config_keys()) {
      app.add_option(flag_name(key), overrides_[key], "Override config key " + key);
    }
  }

  cgl::Config resolve() const {
    cgl::Config config;
    std::string file = config_file_;
    if (file.empty()) {
      if (const char* env = std::getenv("CGL_CONFIG"); env && *env) file = env;
    }
    if (!file.empty()) config = cgl::load_config(file, config);
    for (const auto& [key, value] : overrides_) {
      if (value.empty()) continue;
      try {
        config.set(key, value);
      } catch (const cgl::Error& e) {
        throw UsageError(e.what());
      }
    }
    try {
      config.validate();
    } catch (const cgl::Error& e) {
      throw UsageError(e.what());
    }
    return config;
  }

 private:
  std::string config_file_;
  std::map<std::string, std::string> overrides_;
};

std::mutex log_mutex;

void log_line(const std::string& line) {
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cout << line << '\n' << std::flush;
}

struct DetectArgs {
  std::string rgb, thermal, dataset, out;
  int jobs = 1;
  bool overlay = false;
  bool trace = false;
};

void detect_one(const cgl::PairDescriptor& desc, const cgl::Config& config,
                const DetectArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  cgl::PairDescriptor input = desc;
  input.gt.reset();
  const cgl::ImagePair pair = cgl::load_pair(input);
  const cgl::Detection det = cgl::detect(pair, config);
  const fs::path out(args.out);
  cgl::write_png(out / (pair.id + ".png"), det.saliency.rendered);
  if (args.overlay) {
    fs::create_directories(out / "overlay");
    cgl::write_png(out / "overlay" / (pair.id + ".png"),
                   cgl::overlay(pair.rgb, det.saliency.rendered));
  }
  if (args.trace && det.foreground_state) {
    fs::create_directories(out / "trace");
    std::ofstream csv(out / "trace" / (pair.id + ".csv"));
    cgl::write_trace_csv(csv, *det.foreground_state);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3fs", seconds);
  log_line(pair.id + "  n=" + std::to_string(det.superpixels.n) + "  " + buf);
}

int cmd_detect(const DetectArgs& args, const cgl::Config& config) {
  const bool single = !args.rgb.empty() || !args.thermal.empty();
  if (single == !args.dataset.empty()) {
    throw UsageError("detect needs either --rgb and --t, or --dataset");
  }
  if (single && (args.rgb.empty() || args.thermal.empty())) {
    throw UsageError("--rgb and --t must be given together");
  }
  if (args.jobs < 1) throw UsageError("--jobs must be at least 1");

  std::vector<cgl::PairDescriptor> pairs;
  if (single) {
    pairs.push_back({fs::path(args.rgb).stem().string(), args.rgb, args.thermal, std::nullopt});
  } else {
    pairs = cgl::scan_dataset(args.dataset);
  }
  fs::create_directories(args.out);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::optional<std::string> first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      try {
        detect_one(pairs[i], config, args);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = pairs[i].id + ": " + e.what();
      }
    }
  };
  const int threads = std::min<int>(args.jobs, static_cast<int>(std::max<std::size_t>(pairs.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) throw std::runtime_error(*first_error);
  return 0;
}

struct EvalArgs {
  std::string maps, dataset, attributes, out;
};

cgl::Raster load_map(const fs::path& path) {
  cgl::Raster r = cgl::read_image(path);
  return r.channels() == 1 ? r : cgl::to_single_channel(r);
}

int cmd_eval(const EvalArgs& args) {
  std::vector<cgl::ImagePair> dataset;
  for (const auto& desc : cgl::scan_dataset(args.dataset)) {
    if (!desc.gt) throw cgl::Error(cgl::ErrorCode::MissingGT, "no ground truth for " + desc.id);
    cgl::ImagePair pair;
    pair.id = desc.id;
    pair.gt = cgl::binarize(load_map(*desc.gt));
    dataset.push_back(std::move(pair));
  }
  std::map<std::string, cgl::Raster> maps;
  for (const auto& entry : fs::directory_iterator(args.maps)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      maps.emplace(entry.path().stem().string(), load_map(entry.path()));
    }
  }
  std::optional<cgl::AttributeTable> attrs;
  if (!args.attributes.empty()) attrs = cgl::read_attributes(args.attributes);
  const cgl::EvalReport report =
      cgl::evaluate_dataset(maps, dataset, attrs ? &*attrs : nullptr);

  const fs::path out = args.out.empty() ? fs::path(args.maps) : fs::path(args.out);
  fs::create_directories(out);
  {
    std::ofstream csv(out / "report.csv");
    cgl::write_report_csv(csv, report);
    std::ofstream json(out / "report.json");
    cgl::write_report_json(json, report);
    std::ofstream pr(out / "pr_curve.csv");
    cgl::write_pr_csv(pr, report.mean_curve);
    if (!csv || !json || !pr) {
      throw cgl::Error(cgl::ErrorCode::Io, "cannot write reports to " + out.string());
    }
  }
  std::printf("images=%zu  precision=%.3f  recall=%.3f  F=%.3f  maxF=%.3f\n",
              report.images.size(), report.mean.precision, report.mean.recall, report.mean.f,
              report.max_f);
  for (const auto& [tag, prf] : report.attributes) {
    std::printf("  %-8s n=%-4d precision=%.3f  recall=%.3f  F=%.3f\n", tag.c_str(),
                report.attribute_counts.at(tag), prf.precision, prf.recall, prf.f);
  }
  return 0;
}

struct SegmentArgs {
  std::string rgb, thermal, out;
};

int cmd_segment(const SegmentArgs& args, const cgl::Config& config) {
  const cgl::ImagePair pair = cgl::load_pair(args.rgb, args.thermal);
  const cgl::SuperpixelMap map = cgl::slic_segment(pair, config.slic_options());
  if (const fs::path parent = fs::path(args.out).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  cgl::write_png(args.out, cgl::label_image(map));
  const double mean_size = static_cast<double>(map.labels.size()) / map.n;
  std::printf("n=%d mean_size=%.1f\n", map.n, mean_size);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RGB-T saliency detection by collaborative graph learning"};
  app.require_subcommand(1);

  ConfigOptions detect_cfg, segment_cfg, print_cfg;

  DetectArgs detect_args;
  auto* detect = app.add_subcommand("detect", "Compute saliency maps");
  detect->add_option("--rgb", detect_args.rgb, "RGB image");
  detect->add_option("--t", detect_args.thermal, "Thermal image");
  detect->add_option("--dataset", detect_args.dataset, "Dataset root with RGB/ and T/");
  detect->add_option("--out", detect_args.out, "Output directory")->required();
  detect->add_option("--jobs", detect_args.jobs, "Images processed in parallel");
  detect->add_flag("--overlay", detect_args.overlay, "Also write overlays to <out>/overlay");
  detect->add_flag("--trace", detect_args.trace, "Write solver traces to <out>/trace");
  detect_cfg.attach(*detect);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate saliency maps against ground truth");
  eval->add_option("--maps", eval_args.maps, "Directory of <id>.png maps")->required();
  eval->add_option("--dataset", eval_args.dataset, "Dataset root with GT/")->required();
  eval->add_option("--attributes", eval_args.attributes, "CSV of id,TAG1;TAG2");
  eval->add_option("--out", eval_args.out, "Report directory (default: --maps)");

  SegmentArgs segment_args;
  auto* segment = app.add_subcommand("segment", "Write a superpixel label image");
  segment->add_option("--rgb", segment_args.rgb, "RGB image")->required();
  segment->add_option("--t", segment_args.thermal, "Thermal image")->required();
  segment->add_option("--out", segment_args.out, "Output PNG")->required();
  segment_cfg.attach(*segment);

  auto* print = app.add_subcommand("print-config", "Print the effective configuration");
  print_cfg.attach(*print);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (detect->parsed()) return cmd_detect(detect_args, detect_cfg.resolve());
    if (eval->parsed()) return cmd_eval(eval_args);
    if (segment->parsed()) return cmd_segment(segment_args, segment_cfg.resolve());
    if (print->parsed()) {
      std::cout << cgl::format_config(print_cfg.resolve());
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
