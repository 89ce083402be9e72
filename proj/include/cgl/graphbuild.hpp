#pragma once

#include <Eigen/Dense>

#include <vector>

#include "cgl/features.hpp"
#include "cgl/superpixel.hpp"

namespace cgl {

/// a_ij = exp(-sigma * ||x_i - x_j||_2) on adjacent pairs, 0 elsewhere.
Eigen::MatrixXd build_affinity(const FeatureMatrix& features, const Adjacency& adjacency,
                               double sigma);

/// L = D - A with D the diagonal of row sums.
Eigen::MatrixXd laplacian(const Eigen::MatrixXd& affinity);

struct WeightedEdge {
  int i;
  int j;
  double weight;
};

/// Structure-fixed graphs for every (modality, feature) pair.
struct GraphStack {
  int n = 0;
  int M = 0;
  int K = 0;
  Adjacency adjacency;
  std::vector<double> sigma;                 // per modality
  std::vector<Eigen::MatrixXd> A;            // index m * K + k
  std::vector<Eigen::MatrixXd> L;
  std::vector<std::vector<WeightedEdge>> edges;  // nonzero upper-triangle entries of A

  std::size_t index(int m, int k) const noexcept { return static_cast<std::size_t>(m) * K + k; }
  const Eigen::MatrixXd& affinity(int m, int k) const { return A.at(index(m, k)); }
  const Eigen::MatrixXd& lap(int m, int k) const { return L.at(index(m, k)); }

  /// Tr(W' L^(m,k) W), evaluated over the sparse edge list.
  double trace_form(int m, int k, const Eigen::MatrixXd& W) const;
};

/// Builds a stack from explicitly given affinities (M*K of them, m-major).
GraphStack make_stack(int M, int K, std::vector<Eigen::MatrixXd> affinities,
                      std::vector<double> sigma = {});

/// sigma_rgb applies to RGB-modality features, sigma_t to thermal ones.
GraphStack build_stack(const FeatureSet& features, const Adjacency& adjacency, double sigma_rgb,
                       double sigma_t);

}  // namespace cgl
