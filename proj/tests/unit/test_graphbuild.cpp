#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "cgl/graphbuild.hpp"
#include "check.hpp"
#include "fixtures.hpp"

using namespace cgl;
using cgl::testing::error_code;

namespace {

Adjacency complete(int n) {
  Adjacency adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) adj.connect(i, j);
  }
  return adj;
}

Adjacency random_adjacency(int n, double p, std::mt19937& rng) {
  std::bernoulli_distribution coin(p);
  Adjacency adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (coin(rng)) adj.connect(i, j);
    }
  }
  return adj;
}

FeatureMatrix random_features(int n, int d, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FeatureMatrix f(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) f(i, j) = u(rng);
  }
  return f;
}

}  // namespace

TEST_CASE("affinity of unit-distance-scaled features") {
  FeatureMatrix f(2, 1);
  f << 0.0, 0.1;
  const Eigen::MatrixXd A = build_affinity(f, complete(2), 20.0);
  CHECK(A(0, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(A(0, 1) == doctest::Approx(0.1353).epsilon(1e-4));
  CHECK(A(0, 0) == 0.0);
  CHECK(A(1, 0) == A(0, 1));
}

TEST_CASE("affinity uses the Euclidean norm, not its square") {
  FeatureMatrix f(2, 2);
  f << 0.0, 0.0, 0.3, 0.4;
  const Eigen::MatrixXd A = build_affinity(f, complete(2), 1.0);
  CHECK(A(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("non-adjacent pairs have zero affinity") {
  FeatureMatrix f = FeatureMatrix::Zero(3, 1);
  Adjacency adj(3);
  adj.connect(0, 1);
  const Eigen::MatrixXd A = build_affinity(f, adj, 5.0);
  CHECK(A(0, 1) == 1.0);
  CHECK(A(0, 2) == 0.0);
  CHECK(A(1, 2) == 0.0);
}

TEST_CASE("Laplacian is symmetric PSD with zero row sums") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5 + trial;
    const Eigen::MatrixXd A = build_affinity(random_features(n, 3, rng),
                                             random_adjacency(n, 0.5, rng), 4.0);
    const Eigen::MatrixXd L = laplacian(A);
    CHECK((L - L.transpose()).norm() == 0.0);
    CHECK((L * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(L).eigenvalues();
    CHECK(eig.minCoeff() > -1e-10);
  }
}

TEST_CASE("affinity decreases monotonically in sigma") {
  std::mt19937 rng(4);
  const FeatureMatrix f = random_features(6, 2, rng);
  const Adjacency adj = complete(6);
  Eigen::MatrixXd prev = build_affinity(f, adj, 0.5);
  for (double sigma : {1.0, 2.0, 8.0, 40.0}) {
    const Eigen::MatrixXd next = build_affinity(f, adj, sigma);
    CHECK((next.array() <= prev.array()).all());
    prev = next;
  }
}

TEST_CASE("affinity is equivariant under node permutation") {
  std::mt19937 rng(5);
  const int n = 8;
  const FeatureMatrix f = random_features(n, 4, rng);
  const Adjacency adj = random_adjacency(n, 0.6, rng);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  FeatureMatrix fp(n, 4);
  Adjacency ap(n);
  for (int i = 0; i < n; ++i) fp.row(i) = f.row(perm[i]);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && adj(perm[i], perm[j])) ap.connect(i, j);
    }
  }
  const Eigen::MatrixXd A = build_affinity(f, adj, 3.0);
  const Eigen::MatrixXd B = build_affinity(fp, ap, 3.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) CHECK(B(i, j) == A(perm[i], perm[j]));
  }
}

TEST_CASE("affinity rejects bad sigma and non-finite features") {
  FeatureMatrix f = FeatureMatrix::Zero(2, 1);
  CHECK(error_code([&] { build_affinity(f, complete(2), 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([&] { build_affinity(f, complete(2), -1.0); }) == ErrorCode::InvalidArgument);
  f(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(error_code([&] { build_affinity(f, complete(2), 1.0); }) == ErrorCode::NonFinite);
}

TEST_CASE("trace_form equals the dense Tr(W'LW)") {
  std::mt19937 rng(6);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 7;
    const Eigen::MatrixXd A = build_affinity(random_features(n, 2, rng),
                                             random_adjacency(n, 0.5, rng), 2.0);
    const GraphStack stack = make_stack(1, 1, {A});
    Eigen::MatrixXd W(n, n);
    for (int i = 0; i < n * n; ++i) W.data()[i] = g(rng);
    const double dense = (W.transpose() * laplacian(A) * W).trace();
    CHECK(stack.trace_form(0, 0, W) == doctest::Approx(dense).epsilon(1e-12));
  }
}

TEST_CASE("build_stack applies per-modality sigma") {
  const ImagePair pair = cgl::testing::random_pair(12, 12, 2);
  const SuperpixelMap map = cgl::testing::tile_map(12, 12, 3, 3);
  const FeatureSet features = assemble(pair, map);
  const Adjacency adj = adjacency(map);
  const GraphStack stack = build_stack(features, adj, 20.0, 40.0);
  CHECK(stack.n == 9);
  CHECK(stack.M == 2);
  CHECK(stack.K == 1);
  CHECK(stack.affinity(0, 0).isApprox(build_affinity(features.at(0, 0), adj, 20.0)));
  CHECK(stack.affinity(1, 0).isApprox(build_affinity(features.at(1, 0), adj, 40.0)));
  CHECK(stack.lap(1, 0).isApprox(laplacian(stack.affinity(1, 0))));
}
