#include "cgl/ranking.hpp"

#include "cgl/error.hpp"

namespace cgl {

Eigen::VectorXd boundary_queries(const SuperpixelMap& map, Side side) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(map.n);
  for (int i = 0; i < map.n; ++i) {
    if (map.touches(i, side)) y(i) = 1.0;
  }
  if (y.sum() == 0.0) {
    throw Error(ErrorCode::NoBoundary, std::string("no superpixel touches the ") +
                                           to_string(side) + " border");
  }
  return y;
}

Eigen::VectorXd normalize_minmax(const Eigen::VectorXd& v) {
  if (v.size() == 0) return v;
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  if (!(hi > lo)) return Eigen::VectorXd::Zero(v.size());
  return ((v.array() - lo) / (hi - lo)).matrix();
}

Eigen::MatrixXd mean_affinity(const GraphStack& stack) {
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(stack.n, stack.n);
  for (const auto& A : stack.A) mean += A;
  return mean / static_cast<double>(stack.A.size());
}

Eigen::VectorXd rank(const GraphStack& stack, const Eigen::VectorXd& y,
                     const RankingOptions& options, SolverState* state) {
  if (options.fixed_graph) {
    options.params.validate();
    return update_s(mean_affinity(stack), y, options.params.lambda1);
  }
  SolverState result = solve(stack, y, options.params);
  Eigen::VectorXd s = result.s;
  if (state) *state = std::move(result);
  return s;
}

BackgroundStage background_stage(const GraphStack& stack, const SuperpixelMap& map,
                                 const RankingOptions& options) {
  if (map.n != stack.n) {
    throw Error(ErrorCode::DimensionMismatch, "superpixel map and graph stack differ in size");
  }
  BackgroundStage out;
  out.combined = Eigen::VectorXd::Ones(stack.n);
  for (std::size_t i = 0; i < 4; ++i) {
    const Eigen::VectorXd y = boundary_queries(map, kAllSides[i]);
    out.sides[i] = (1.0 - normalize_minmax(rank(stack, y, options)).array()).matrix();
    out.combined = out.combined.cwiseProduct(out.sides[i]);
  }
  return out;
}

Eigen::VectorXd foreground_queries(const Eigen::VectorXd& s_bq) {
  const double threshold = s_bq.mean();
  Eigen::VectorXd y = (s_bq.array() > threshold).cast<double>().matrix();
  if (y.sum() == 0.0) {
    Eigen::Index best = 0;
    s_bq.maxCoeff(&best);  // first maximum
    y(best) = 1.0;
  }
  return y;
}

Raster render(const SuperpixelMap& map, const Eigen::VectorXd& values) {
  if (values.size() != map.n) {
    throw Error(ErrorCode::DimensionMismatch, "value count differs from superpixel count");
  }
  Raster out(map.width, map.height, 1);
  for (std::size_t p = 0; p < map.labels.size(); ++p) {
    out.data()[p] = static_cast<float>(values(map.labels[p]));
  }
  return out;
}

SaliencyMap foreground_stage(const GraphStack& stack, const SuperpixelMap& map,
                             const Eigen::VectorXd& s_bq, const RankingOptions& options) {
  if (s_bq.size() != stack.n) {
    throw Error(ErrorCode::DimensionMismatch, "background map length differs from n");
  }
  const Eigen::VectorXd y = foreground_queries(s_bq);
  SaliencyMap out;
  out.values = normalize_minmax(rank(stack, y, options));
  out.rendered = render(map, out.values);
  return out;
}

RankingOptions ranking_options(const Config& config) {
  return {config.solver_params(), config.fixed_graph};
}

Detection detect(const SuperpixelMap& map, const FeatureSet& features, const Config& config) {
  config.validate();
  Adjacency adj = adjacency(map);
  if (config.extended_adjacency) adj = extend_adjacency(adj, map);
  const FeatureSet selected = select_modalities(features, config.modality_list());
  const GraphStack stack = build_stack(selected, adj, config.sigma_rgb, config.sigma_t);
  const RankingOptions options = ranking_options(config);

  Detection det;
  det.superpixels = map;
  det.background = background_stage(stack, map, options);
  const Eigen::VectorXd y = foreground_queries(det.background.combined);
  Eigen::VectorXd s;
  if (options.fixed_graph) {
    s = rank(stack, y, options);
  } else {
    SolverState state;
    s = rank(stack, y, options, &state);
    det.foreground_state = std::move(state);
  }
  det.saliency.values = normalize_minmax(s);
  det.saliency.rendered = render(map, det.saliency.values);
  return det;
}

Detection detect(const ImagePair& pair, const Config& config) {
  config.validate();
  std::optional<DeepPaths> deep;
  if (config.deep_features) {
    deep = deep_paths_for(config.features_dir, pair.id);
    for (const auto& per_modality : *deep) {
      for (const auto& path : per_modality) {
        if (!std::filesystem::is_regular_file(path)) {
          throw Error(ErrorCode::Io, "missing tensor file " + path.string());
        }
      }
    }
  }
  const SuperpixelMap map = slic_segment(pair, config.slic_options());
  const FeatureSet features = assemble(pair, map, deep);
  return detect(map, features, config);
}

}  // namespace cgl
