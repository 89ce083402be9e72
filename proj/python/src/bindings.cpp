#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <sstream>
#include <string>

#include "cgl/config.hpp"
#include "cgl/error.hpp"
#include "cgl/features.hpp"
#include "cgl/graphbuild.hpp"
#include "cgl/imgcore.hpp"
#include "cgl/metrics.hpp"
#include "cgl/ranking.hpp"
#include "cgl/solver.hpp"
#include "cgl/superpixel.hpp"

namespace py = pybind11;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

namespace {

// (H, W) for one channel, (H, W, C) otherwise.
py::array_t<float> to_array(const cgl::Raster& r) {
  std::vector<py::ssize_t> shape = {r.height(), r.width()};
  if (r.channels() != 1) shape.push_back(r.channels());
  py::array_t<float> out(shape);
  std::copy(r.data().begin(), r.data().end(), out.mutable_data());
  return out;
}

cgl::Raster from_array(const FloatArray& a) {
  if (a.ndim() != 2 && a.ndim() != 3) {
    throw cgl::Error(cgl::ErrorCode::Layout, "expected an (H, W) or (H, W, C) array");
  }
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  return cgl::Raster(w, h, c, std::vector<float>(a.data(), a.data() + a.size()));
}

cgl::ImagePair make_pair(const FloatArray& rgb, const FloatArray& thermal, const std::string& id) {
  cgl::ImagePair pair;
  pair.id = id;
  pair.rgb = from_array(rgb);
  pair.thermal = from_array(thermal);
  if (pair.rgb.channels() != 3 || pair.thermal.channels() != 1) {
    throw cgl::Error(cgl::ErrorCode::Channel, "rgb needs 3 channels and thermal 1");
  }
  if (!pair.rgb.same_size(pair.thermal)) {
    throw cgl::Error(cgl::ErrorCode::DimensionMismatch, "rgb and thermal sizes differ");
  }
  return pair;
}

cgl::Modality parse_modality(const std::string& tag) {
  if (tag == "rgb") return cgl::Modality::Rgb;
  if (tag == "t") return cgl::Modality::Thermal;
  throw cgl::Error(cgl::ErrorCode::InvalidArgument, "modality must be 'rgb' or 't': " + tag);
}

py::array_t<float> tensor_to_array(const cgl::Tensor& t) {
  py::array_t<float> out({static_cast<py::ssize_t>(t.height), static_cast<py::ssize_t>(t.width),
                          static_cast<py::ssize_t>(t.channels)});
  std::copy(t.data.begin(), t.data.end(), out.mutable_data());
  return out;
}

cgl::Tensor tensor_from_array(const FloatArray& a) {
  if (a.ndim() != 3) throw cgl::Error(cgl::ErrorCode::Layout, "expected an (H, W, C) array");
  return cgl::Tensor{static_cast<std::uint32_t>(a.shape(0)), static_cast<std::uint32_t>(a.shape(1)),
                     static_cast<std::uint32_t>(a.shape(2)),
                     std::vector<float>(a.data(), a.data() + a.size())};
}

py::tuple curve_tuple(const cgl::PRCurve& c) {
  return py::make_tuple(py::array(256, c.precision.data()), py::array(256, c.recall.data()));
}

py::tuple prf_tuple(const cgl::PRF& p) { return py::make_tuple(p.precision, p.recall, p.f); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "RGB-T saliency detection by collaborative graph learning";

  auto error = py::register_exception<cgl::Error>(m, "CglError", PyExc_RuntimeError);
  (void)error;

  // Images.
  py::class_<cgl::ImagePair>(m, "ImagePair")
      .def(py::init(&make_pair), py::arg("rgb"), py::arg("thermal"), py::arg("id") = "")
      .def_readwrite("id", &cgl::ImagePair::id)
      .def_property_readonly("rgb", [](const cgl::ImagePair& p) { return to_array(p.rgb); })
      .def_property_readonly("thermal", [](const cgl::ImagePair& p) { return to_array(p.thermal); })
      .def_property_readonly("gt", [](const cgl::ImagePair& p) -> py::object {
        return p.gt ? py::object(to_array(*p.gt)) : py::none();
      })
      .def_property_readonly("width", [](const cgl::ImagePair& p) { return p.rgb.width(); })
      .def_property_readonly("height", [](const cgl::ImagePair& p) { return p.rgb.height(); });

  m.def("load_pair",
        py::overload_cast<const std::filesystem::path&, const std::filesystem::path&,
                          const std::optional<std::filesystem::path>&>(&cgl::load_pair),
        py::arg("rgb"), py::arg("thermal"), py::arg("gt") = py::none());
  m.def("read_image", [](const std::filesystem::path& p) { return to_array(cgl::read_image(p)); });
  m.def("write_png", [](const std::filesystem::path& p, const FloatArray& a) {
    cgl::write_png(p, from_array(a));
  });
  m.def("rgb_to_lab", [](const FloatArray& rgb) { return to_array(cgl::rgb_to_lab(from_array(rgb)).lab); },
        "Scaled LAB: L/100, (a+128)/255, (b+128)/255.");
  m.def("srgb_to_lab", [](double r, double g, double b) {
    const cgl::Lab lab = cgl::srgb_to_lab(r, g, b);
    return py::make_tuple(lab.l, lab.a, lab.b);
  });

  // Superpixels.
  py::class_<cgl::SuperpixelMap>(m, "SuperpixelMap")
      .def_readonly("n", &cgl::SuperpixelMap::n)
      .def_readonly("width", &cgl::SuperpixelMap::width)
      .def_readonly("height", &cgl::SuperpixelMap::height)
      .def_readonly("sizes", &cgl::SuperpixelMap::sizes)
      .def_readonly("sides", &cgl::SuperpixelMap::sides)
      .def_property_readonly("labels", [](const cgl::SuperpixelMap& s) {
        py::array_t<int> out({s.height, s.width});
        std::copy(s.labels.begin(), s.labels.end(), out.mutable_data());
        return out;
      })
      .def_property_readonly("centroids", [](const cgl::SuperpixelMap& s) {
        Eigen::MatrixXd c(s.n, 2);
        for (int i = 0; i < s.n; ++i) c.row(i) << s.centroids[i].x, s.centroids[i].y;
        return c;
      });

  m.def("superpixel_map", [](py::array_t<int, py::array::c_style | py::array::forcecast> labels) {
    if (labels.ndim() != 2) throw cgl::Error(cgl::ErrorCode::Layout, "expected an (H, W) array");
    return cgl::make_superpixel_map(static_cast<int>(labels.shape(1)), static_cast<int>(labels.shape(0)),
                                    std::vector<int>(labels.data(), labels.data() + labels.size()));
  });
  m.def("slic_segment",
        [](const cgl::ImagePair& pair, int n_target, double compactness, int max_iters, int threads) {
          return cgl::slic_segment(pair, cgl::SlicOptions{n_target, compactness, max_iters, threads});
        },
        py::arg("pair"), py::arg("n_target") = 300,
        py::arg("compactness") = cgl::SlicOptions{}.compactness, py::arg("max_iters") = 10,
        py::arg("threads") = 1);
  m.def("label_image", [](const cgl::SuperpixelMap& s) { return to_array(cgl::label_image(s)); });

  py::class_<cgl::Adjacency>(m, "Adjacency")
      .def(py::init<int>())
      .def("connect", &cgl::Adjacency::connect)
      .def("__call__", &cgl::Adjacency::operator())
      .def("edges", &cgl::Adjacency::edges)
      .def("edge_count", &cgl::Adjacency::edge_count)
      .def_property_readonly("size", &cgl::Adjacency::size)
      .def("dense", [](const cgl::Adjacency& a) {
        Eigen::MatrixXi d = Eigen::MatrixXi::Zero(a.size(), a.size());
        for (const auto& [i, j] : a.edges()) d(i, j) = d(j, i) = 1;
        return d;
      });
  m.def("adjacency", &cgl::adjacency);
  m.def("extend_adjacency", &cgl::extend_adjacency);

  // Features.
  m.def("color_features", [](const FloatArray& channels, const cgl::SuperpixelMap& s) {
    return cgl::color_features(from_array(channels), s);
  });
  m.def("tensor_path",
        [](const std::filesystem::path& dir, const std::string& id, const std::string& modality,
           const std::string& layer) { return cgl::tensor_path(dir, id, parse_modality(modality), layer); },
        py::arg("dir"), py::arg("id"), py::arg("modality"), py::arg("layer"));
  m.def("read_tensor", [](const std::filesystem::path& p) { return tensor_to_array(cgl::read_tensor(p)); });
  m.def("write_tensor", [](const std::filesystem::path& p, const FloatArray& a) {
    cgl::write_tensor(p, tensor_from_array(a));
  });
  m.def("encode_tensor", [](const FloatArray& a) {
    const auto bytes = cgl::encode_tensor(tensor_from_array(a));
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def("decode_tensor", [](const py::bytes& b) {
    const std::string s = b;
    return tensor_to_array(cgl::decode_tensor(std::vector<std::uint8_t>(s.begin(), s.end())));
  });

  // Graphs.
  m.def("build_affinity", &cgl::build_affinity, py::arg("features"), py::arg("adjacency"),
        py::arg("sigma"));
  m.def("laplacian", &cgl::laplacian);

  py::class_<cgl::GraphStack>(m, "GraphStack")
      .def_readonly("n", &cgl::GraphStack::n)
      .def_readonly("M", &cgl::GraphStack::M)
      .def_readonly("K", &cgl::GraphStack::K)
      .def_readonly("sigma", &cgl::GraphStack::sigma)
      .def_readonly("A", &cgl::GraphStack::A)
      .def_readonly("L", &cgl::GraphStack::L)
      .def("trace_form", &cgl::GraphStack::trace_form);
  m.def("make_stack", &cgl::make_stack, py::arg("M"), py::arg("K"), py::arg("affinities"),
        py::arg("sigma") = std::vector<double>{});

  // Solver.
  py::class_<cgl::SolverParams>(m, "SolverParams")
      .def(py::init<>())
      .def_readwrite("gamma1", &cgl::SolverParams::gamma1)
      .def_readwrite("gamma2", &cgl::SolverParams::gamma2)
      .def_readwrite("theta", &cgl::SolverParams::theta)
      .def_readwrite("mu", &cgl::SolverParams::mu)
      .def_readwrite("lambda1", &cgl::SolverParams::lambda1)
      .def_readwrite("epsilon", &cgl::SolverParams::epsilon)
      .def_readwrite("max_iters", &cgl::SolverParams::max_iters)
      .def("validate", &cgl::SolverParams::validate);

  py::class_<cgl::SolverState>(m, "SolverState")
      .def_readonly("W", &cgl::SolverState::W)
      .def_readonly("alpha", &cgl::SolverState::alpha)
      .def_readonly("beta", &cgl::SolverState::beta)
      .def_readonly("s", &cgl::SolverState::s)
      .def_readonly("y", &cgl::SolverState::y)
      .def_readonly("iterations", &cgl::SolverState::iterations)
      .def_readonly("converged", &cgl::SolverState::converged)
      .def("graph", &cgl::SolverState::graph)
      .def_property_readonly("objectives", [](const cgl::SolverState& s) {
        std::vector<double> v;
        for (const auto& r : s.trace) v.push_back(r.objective);
        return v;
      })
      .def("trace_csv", [](const cgl::SolverState& s) {
        std::ostringstream out;
        cgl::write_trace_csv(out, s);
        return out.str();
      });

  m.def("solve", [](const cgl::GraphStack& stack, const Eigen::VectorXd& y,
                    const cgl::SolverParams& params) { return cgl::solve(stack, y, params); },
        py::arg("stack"), py::arg("y"), py::arg("params") = cgl::SolverParams{});
  m.def("update_W", &cgl::update_W, py::arg("stack"), py::arg("alpha"), py::arg("beta"),
        py::arg("s"), py::arg("params"));
  m.def("update_beta", &cgl::update_beta, py::arg("stack"), py::arg("W"), py::arg("gamma2"));
  m.def("update_alpha", &cgl::update_alpha, py::arg("stack"), py::arg("W"), py::arg("beta"),
        py::arg("gamma1"), py::arg("gamma2"));
  m.def("update_s", &cgl::update_s, py::arg("W"), py::arg("y"), py::arg("lambda1"));
  m.def("project_graph", &cgl::project_graph);
  m.def("traces", &cgl::traces);
  m.def("objective",
        [](const cgl::GraphStack& stack, const Eigen::MatrixXd& W, const Eigen::VectorXd& alpha,
           const Eigen::MatrixXd& beta, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
           const cgl::SolverParams& params, bool projected) {
          return cgl::objective(stack, W, alpha, beta, s, y, params,
                                projected ? cgl::GraphView::Projected : cgl::GraphView::Raw);
        },
        py::arg("stack"), py::arg("W"), py::arg("alpha"), py::arg("beta"), py::arg("s"),
        py::arg("y"), py::arg("params"), py::arg("projected") = false);

  // Configuration and detection.
  py::class_<cgl::Config>(m, "Config")
      .def(py::init<>())
      .def_readwrite("n_superpixels", &cgl::Config::n_superpixels)
      .def_readwrite("compactness", &cgl::Config::compactness)
      .def_readwrite("slic_iters", &cgl::Config::slic_iters)
      .def_readwrite("sigma_rgb", &cgl::Config::sigma_rgb)
      .def_readwrite("sigma_t", &cgl::Config::sigma_t)
      .def_readwrite("gamma1", &cgl::Config::gamma1)
      .def_readwrite("gamma2", &cgl::Config::gamma2)
      .def_readwrite("theta", &cgl::Config::theta)
      .def_readwrite("mu", &cgl::Config::mu)
      .def_readwrite("lambda1", &cgl::Config::lambda1)
      .def_readwrite("epsilon", &cgl::Config::epsilon)
      .def_readwrite("max_iters", &cgl::Config::max_iters)
      .def_readwrite("deep_features", &cgl::Config::deep_features)
      .def_readwrite("fixed_graph", &cgl::Config::fixed_graph)
      .def_readwrite("extended_adjacency", &cgl::Config::extended_adjacency)
      .def_readwrite("modalities", &cgl::Config::modalities)
      .def_readwrite("features_dir", &cgl::Config::features_dir)
      .def("set", &cgl::Config::set)
      .def("validate", &cgl::Config::validate)
      .def("solver_params", &cgl::Config::solver_params)
      .def("__eq__", [](const cgl::Config& a, const cgl::Config& b) { return a == b; })
      .def("__str__", &cgl::format_config);
  m.def("config_keys", &cgl::config_keys);
  m.def("parse_config", &cgl::parse_config, py::arg("text"), py::arg("base") = cgl::Config{});
  m.def("load_config", &cgl::load_config, py::arg("path"), py::arg("base") = cgl::Config{});
  m.def("format_config", &cgl::format_config);

  py::class_<cgl::Detection>(m, "Detection")
      .def_readonly("superpixels", &cgl::Detection::superpixels)
      .def_property_readonly("values", [](const cgl::Detection& d) { return d.saliency.values; })
      .def_property_readonly("saliency", [](const cgl::Detection& d) { return to_array(d.saliency.rendered); })
      .def_property_readonly("background", [](const cgl::Detection& d) { return d.background.combined; })
      .def_property_readonly("background_sides", [](const cgl::Detection& d) {
        return std::vector<Eigen::VectorXd>(d.background.sides.begin(), d.background.sides.end());
      })
      .def_readonly("foreground_state", &cgl::Detection::foreground_state);
  m.def("detect", py::overload_cast<const cgl::ImagePair&, const cgl::Config&>(&cgl::detect),
        py::arg("pair"), py::arg("config") = cgl::Config{});

  // Metrics.
  m.def("quantize", &cgl::quantize);
  m.def("pr_curve", [](const FloatArray& sal, const FloatArray& gt) {
    return curve_tuple(cgl::pr_curve(from_array(sal), from_array(gt)));
  }, "Returns (precision, recall) at thresholds 0..255.");
  m.def("f_measure", &cgl::f_measure, py::arg("precision"), py::arg("recall"),
        py::arg("beta2") = cgl::kDefaultBeta2);
  m.def("adaptive_threshold", [](const FloatArray& sal) { return cgl::adaptive_threshold(from_array(sal)); });
  m.def("adaptive_prf",
        [](const FloatArray& sal, const FloatArray& gt, double beta2) {
          return prf_tuple(cgl::adaptive_prf(from_array(sal), from_array(gt), beta2));
        },
        py::arg("saliency"), py::arg("gt"), py::arg("beta2") = cgl::kDefaultBeta2,
        "Returns (precision, recall, F).");
}
