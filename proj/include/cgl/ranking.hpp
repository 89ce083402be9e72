#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>

#include "cgl/config.hpp"
#include "cgl/graphbuild.hpp"
#include "cgl/solver.hpp"
#include "cgl/superpixel.hpp"

namespace cgl {

struct RankingOptions {
  SolverParams params;
  // Rank on the mean structure-fixed affinity instead of learning W.
  bool fixed_graph = false;
};

struct SaliencyMap {
  Eigen::VectorXd values;  // per superpixel, in [0,1]
  Raster rendered;         // full resolution, 1 channel
};

/// y_i = 1 iff superpixel i touches `side`. Throws NoBoundary if none does.
Eigen::VectorXd boundary_queries(const SuperpixelMap& map, Side side);

/// Min-max to [0,1]; a constant vector maps to all zeros.
Eigen::VectorXd normalize_minmax(const Eigen::VectorXd& v);

/// One ranking solve for query indicator `y`.
Eigen::VectorXd rank(const GraphStack& stack, const Eigen::VectorXd& y,
                     const RankingOptions& options, SolverState* state = nullptr);

/// Mean of the structure-fixed affinities, used by the fixed-graph mode.
Eigen::MatrixXd mean_affinity(const GraphStack& stack);

struct BackgroundStage {
  std::array<Eigen::VectorXd, 4> sides;  // 1 - normalized ranking, order of kAllSides
  Eigen::VectorXd combined;              // elementwise product of the four
};

BackgroundStage background_stage(const GraphStack& stack, const SuperpixelMap& map,
                                 const RankingOptions& options);

/// y_i = 1 iff s_bq_i > mean(s_bq); falls back to the lowest-index argmax.
Eigen::VectorXd foreground_queries(const Eigen::VectorXd& s_bq);

/// Paints per-superpixel values onto the label raster.
Raster render(const SuperpixelMap& map, const Eigen::VectorXd& values);

SaliencyMap foreground_stage(const GraphStack& stack, const SuperpixelMap& map,
                             const Eigen::VectorXd& s_bq, const RankingOptions& options);

struct Detection {
  SuperpixelMap superpixels;
  BackgroundStage background;
  SaliencyMap saliency;
  std::optional<SolverState> foreground_state;  // absent in fixed-graph mode
};

RankingOptions ranking_options(const Config& config);

/// Segment -> features -> graphs -> background stage -> foreground stage.
/// Deep tensors are looked up in `config.features_dir` when enabled.
Detection detect(const ImagePair& pair, const Config& config);

/// Pipeline tail on a precomputed segmentation and feature set.
Detection detect(const SuperpixelMap& map, const FeatureSet& features, const Config& config);

}  // namespace cgl
