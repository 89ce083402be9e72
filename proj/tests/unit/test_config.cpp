#include <doctest.h>

#include <fstream>

#include "cgl/config.hpp"
#include "check.hpp"
#include "tempdir.hpp"

using namespace cgl;
using cgl::testing::error_code;

TEST_CASE("defaults carry the published parameter settings") {
  const Config c;
  CHECK(c.n_superpixels == 300);
  CHECK(c.sigma_rgb == 20.0);
  CHECK(c.sigma_t == 40.0);
  const SolverParams p = c.solver_params();
  CHECK(p.gamma1 == 0.5);
  CHECK(p.gamma2 == 8.0);
  CHECK(p.theta == 1e-4);
  CHECK(p.mu == 1e-3);
  CHECK(p.lambda1 == 0.004);
  CHECK(p.epsilon == 1e-4);
  CHECK(p.max_iters == 50);
  CHECK_FALSE(c.deep_features);
  CHECK_FALSE(c.fixed_graph);
  CHECK_FALSE(c.extended_adjacency);
}

TEST_CASE("format/parse round-trips every field exactly") {
  Config c;
  c.n_superpixels = 123;
  c.compactness = 0.1 / 3.0;
  c.theta = 1.0 / 7.0;
  c.lambda1 = 3e-17;
  c.fixed_graph = true;
  c.modalities = "t";
  c.features_dir = "/tmp/feats";
  CHECK(parse_config(format_config(c)) == c);
  CHECK(parse_config(format_config(Config{})) == Config{});
  for (const auto& key : config_keys()) {
    CHECK(format_config(c).find(key + " = ") != std::string::npos);
  }
}

TEST_CASE("parse_config handles comments, blanks and overrides a base") {
  Config base;
  base.theta = 0.5;
  const Config c = parse_config("# header\n\n  sigma_t = 12.5  # trailing\nfixed_graph=on\n", base);
  CHECK(c.sigma_t == 12.5);
  CHECK(c.fixed_graph);
  CHECK(c.theta == 0.5);
}

TEST_CASE("malformed config input is rejected") {
  CHECK(error_code([] { parse_config("bogus = 1\n"); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { parse_config("theta = abc\n"); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { parse_config("max_iters = 2.5\n"); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { parse_config("fixed_graph = maybe\n"); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { parse_config("just words\n"); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { load_config("/nonexistent/cfg"); }) == ErrorCode::Io);
}

TEST_CASE("validate checks ranges") {
  Config c;
  c.mu = 0.0;
  CHECK(error_code([&] { c.validate(); }) == ErrorCode::InvalidArgument);
  c = Config{};
  c.modalities = "ir";
  CHECK(error_code([&] { c.validate(); }) == ErrorCode::InvalidArgument);
  c = Config{};
  c.sigma_t = -1.0;
  CHECK(error_code([&] { c.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("modality selection") {
  Config c;
  CHECK(c.modality_list() == std::vector<Modality>{Modality::Rgb, Modality::Thermal});
  c.set("modalities", "rgb");
  CHECK(c.modality_list() == std::vector<Modality>{Modality::Rgb});
}

TEST_CASE("load_config reads a file") {
  cgl::testing::TempDir dir;
  std::ofstream(dir / "c.cfg") << "n_superpixels = 77\n";
  CHECK(load_config(dir / "c.cfg").n_superpixels == 77);
}
