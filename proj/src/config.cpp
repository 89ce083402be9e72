#include "cgl/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cgl/error.hpp"

namespace cgl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::InvalidArgument, key + ": not a number: '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::InvalidArgument, key + ": not an integer: '" + v + "'");
  }
  return out;
}

bool parse_switch(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw Error(ErrorCode::InvalidArgument, key + ": expected on|off, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const char* on_off(bool b) { return b ? "on" : "off"; }

}  // namespace

SolverParams Config::solver_params() const {
  SolverParams p;
  p.gamma1 = gamma1;
  p.gamma2 = gamma2;
  p.theta = theta;
  p.mu = mu;
  p.lambda1 = lambda1;
  p.epsilon = epsilon;
  p.max_iters = max_iters;
  return p;
}

SlicOptions Config::slic_options() const {
  SlicOptions o;
  o.n_target = n_superpixels;
  o.compactness = compactness;
  o.max_iters = slic_iters;
  return o;
}

std::vector<Modality> Config::modality_list() const {
  if (modalities == "rgbt") return {Modality::Rgb, Modality::Thermal};
  if (modalities == "rgb") return {Modality::Rgb};
  if (modalities == "t") return {Modality::Thermal};
  throw Error(ErrorCode::InvalidArgument, "modalities must be rgbt, rgb or t");
}

void Config::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "n_superpixels") n_superpixels = parse_int(key, value);
  else if (key == "compactness") compactness = parse_double(key, value);
  else if (key == "slic_iters") slic_iters = parse_int(key, value);
  else if (key == "sigma_rgb") sigma_rgb = parse_double(key, value);
  else if (key == "sigma_t") sigma_t = parse_double(key, value);
  else if (key == "gamma1") gamma1 = parse_double(key, value);
  else if (key == "gamma2") gamma2 = parse_double(key, value);
  else if (key == "theta") theta = parse_double(key, value);
  else if (key == "mu") mu = parse_double(key, value);
  else if (key == "lambda1") lambda1 = parse_double(key, value);
  else if (key == "epsilon") epsilon = parse_double(key, value);
  else if (key == "max_iters") max_iters = parse_int(key, value);
  else if (key == "deep_features") deep_features = parse_switch(key, value);
  else if (key == "fixed_graph") fixed_graph = parse_switch(key, value);
  else if (key == "extended_adjacency") extended_adjacency = parse_switch(key, value);
  else if (key == "modalities") modalities = value;
  else if (key == "features_dir") features_dir = value;
  else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
}

void Config::validate() const {
  solver_params().validate();
  if (n_superpixels < 1) throw Error(ErrorCode::InvalidArgument, "n_superpixels must be positive");
  if (slic_iters < 1) throw Error(ErrorCode::InvalidArgument, "slic_iters must be positive");
  if (!(compactness >= 0.0)) throw Error(ErrorCode::InvalidArgument, "compactness must be >= 0");
  if (!(sigma_rgb > 0.0) || !(sigma_t > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sigma values must be positive");
  }
  modality_list();
}

std::vector<std::string> config_keys() {
  return {"n_superpixels", "compactness", "slic_iters",    "sigma_rgb",     "sigma_t",
          "gamma1",        "gamma2",      "theta",         "mu",            "lambda1",
          "epsilon",       "max_iters",   "deep_features", "fixed_graph",   "extended_adjacency",
          "modalities",    "features_dir"};
}

Config parse_config(const std::string& text, Config base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument,
                  "config line " + std::to_string(lineno) + ": expected key = value");
    }
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

Config load_config(const std::filesystem::path& path, Config base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string format_config(const Config& c) {
  std::ostringstream out;
  out << "n_superpixels = " << c.n_superpixels << '\n'
      << "compactness = " << fmt(c.compactness) << '\n'
      << "slic_iters = " << c.slic_iters << '\n'
      << "sigma_rgb = " << fmt(c.sigma_rgb) << '\n'
      << "sigma_t = " << fmt(c.sigma_t) << '\n'
      << "gamma1 = " << fmt(c.gamma1) << '\n'
      << "gamma2 = " << fmt(c.gamma2) << '\n'
      << "theta = " << fmt(c.theta) << '\n'
      << "mu = " << fmt(c.mu) << '\n'
      << "lambda1 = " << fmt(c.lambda1) << '\n'
      << "epsilon = " << fmt(c.epsilon) << '\n'
      << "max_iters = " << c.max_iters << '\n'
      << "deep_features = " << on_off(c.deep_features) << '\n'
      << "fixed_graph = " << on_off(c.fixed_graph) << '\n'
      << "extended_adjacency = " << on_off(c.extended_adjacency) << '\n'
      << "modalities = " << c.modalities << '\n'
      << "features_dir = " << c.features_dir.string() << '\n';
  return out.str();
}

}  // namespace cgl
