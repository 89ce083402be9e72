#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cgl/features.hpp"
#include "cgl/solver.hpp"
#include "cgl/superpixel.hpp"

namespace cgl {

/// Detector settings. Serialized as flat `key = value` lines.
struct Config {
  int n_superpixels = 300;
  double compactness = SlicOptions{}.compactness;
  int slic_iters = 10;
  double sigma_rgb = 20.0;
  double sigma_t = 40.0;
  double gamma1 = 0.5;
  double gamma2 = 8.0;
  double theta = 1e-4;
  double mu = 1e-3;
  double lambda1 = 0.004;
  double epsilon = 1e-4;
  int max_iters = 50;
  bool deep_features = false;
  bool fixed_graph = false;
  bool extended_adjacency = false;
  std::string modalities = "rgbt";  // rgbt | rgb | t
  std::filesystem::path features_dir;

  SolverParams solver_params() const;
  SlicOptions slic_options() const;
  std::vector<Modality> modality_list() const;

  /// Sets one key from its textual value; throws InvalidArgument on unknown
  /// keys or malformed values.
  void set(const std::string& key, const std::string& value);

  void validate() const;

  bool operator==(const Config&) const = default;
};

std::vector<std::string> config_keys();

/// Applies `key = value` lines onto `base`; `#` starts a comment.
Config parse_config(const std::string& text, Config base = {});
Config load_config(const std::filesystem::path& path, Config base = {});
std::string format_config(const Config& config);

}  // namespace cgl
