#include "cgl/graphbuild.hpp"

#include <cmath>

#include "cgl/error.hpp"

namespace cgl {

Eigen::MatrixXd build_affinity(const FeatureMatrix& features, const Adjacency& adjacency,
                               double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  }
  if (!features.allFinite()) throw Error(ErrorCode::NonFinite, "feature vectors are not finite");
  const int n = static_cast<int>(features.rows());
  if (adjacency.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "adjacency size differs from feature count");
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : adjacency.edges()) {
    const double d = (features.row(i) - features.row(j)).norm();
    const double a = std::exp(-sigma * d);
    A(i, j) = a;
    A(j, i) = a;
  }
  return A;
}

Eigen::MatrixXd laplacian(const Eigen::MatrixXd& affinity) {
  Eigen::MatrixXd L = -affinity;
  L.diagonal() += affinity.rowwise().sum();
  return L;
}

double GraphStack::trace_form(int m, int k, const Eigen::MatrixXd& W) const {
  // Tr(W'LW) = sum_{i<j} a_ij ||W.row(i) - W.row(j)||^2
  double total = 0.0;
  for (const auto& e : edges.at(index(m, k))) {
    total += e.weight * (W.row(e.i) - W.row(e.j)).squaredNorm();
  }
  return total;
}

GraphStack make_stack(int M, int K, std::vector<Eigen::MatrixXd> affinities,
                      std::vector<double> sigma) {
  if (M < 1 || K < 1 || affinities.size() != static_cast<std::size_t>(M) * K) {
    throw Error(ErrorCode::InvalidArgument, "affinity count must equal M*K");
  }
  GraphStack stack;
  stack.M = M;
  stack.K = K;
  stack.n = static_cast<int>(affinities.front().rows());
  stack.sigma = std::move(sigma);
  stack.adjacency = Adjacency(stack.n);
  for (auto& A : affinities) {
    if (A.rows() != stack.n || A.cols() != stack.n) {
      throw Error(ErrorCode::DimensionMismatch, "affinities must share one n x n shape");
    }
    std::vector<WeightedEdge> edges;
    for (int i = 0; i < stack.n; ++i) {
      for (int j = i + 1; j < stack.n; ++j) {
        if (A(i, j) != 0.0) {
          edges.push_back({i, j, A(i, j)});
          stack.adjacency.connect(i, j);
        }
      }
    }
    stack.L.push_back(laplacian(A));
    stack.edges.push_back(std::move(edges));
    stack.A.push_back(std::move(A));
  }
  return stack;
}

GraphStack build_stack(const FeatureSet& features, const Adjacency& adjacency, double sigma_rgb,
                       double sigma_t) {
  if (features.vectors.size() != static_cast<std::size_t>(features.M) * features.K) {
    throw Error(ErrorCode::InvalidArgument, "feature set is incomplete");
  }
  std::vector<Eigen::MatrixXd> affinities;
  std::vector<double> sigma;
  for (int m = 0; m < features.M; ++m) {
    const double s = features.modalities.at(m) == Modality::Rgb ? sigma_rgb : sigma_t;
    sigma.push_back(s);
    for (int k = 0; k < features.K; ++k) {
      affinities.push_back(build_affinity(features.at(m, k), adjacency, s));
    }
  }
  GraphStack stack = make_stack(features.M, features.K, std::move(affinities), std::move(sigma));
  // Keep the structural relation even where exp() underflowed to zero.
  stack.adjacency = adjacency;
  return stack;
}

}  // namespace cgl
