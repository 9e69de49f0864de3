#include "condwalk/io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace condwalk {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& reason) {
  throw ConfigError(path + ": " + reason);
}

double get_number(const Json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(path, std::string("missing field '") + key + "'");
  if (!j[key].is_number()) fail(path + "." + key, "expected a number");
  return j[key].get<double>();
}

int get_int(const Json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(path, std::string("missing field '") + key + "'");
  if (!j[key].is_number_integer()) fail(path + "." + key, "expected an integer");
  return j[key].get<int>();
}

Vector get_vector(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
    v(static_cast<int>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix get_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<int>(j.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      fail(path + "[" + std::to_string(r) + "]", "rows must be arrays of equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        fail(path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]",
             "expected a number");
      m(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

ScalarFamily parse_scalar_family(const Json& j, const std::string& path) {
  if (!j.contains("family")) fail(path, "missing field 'family'");
  const std::string family = j["family"].get<std::string>();
  ScalarFamily out;
  if (family == "gaussian") {
    expect_keys(j, {"family", "mean", "sigma"}, path);
    out.kind = ScalarFamily::Kind::Gaussian;
    out.p1 = get_number(j, "mean", path);
    out.p2 = get_number(j, "sigma", path);
    if (out.p2 <= 0.0) fail(path + ".sigma", "must be positive");
  } else if (family == "exponential") {
    expect_keys(j, {"family", "rate"}, path);
    out.kind = ScalarFamily::Kind::Exponential;
    out.p1 = get_number(j, "rate", path);
    if (out.p1 <= 0.0) fail(path + ".rate", "must be positive");
  } else if (family == "gamma") {
    expect_keys(j, {"family", "shape", "rate"}, path);
    out.kind = ScalarFamily::Kind::Gamma;
    out.p1 = get_number(j, "shape", path);
    out.p2 = get_number(j, "rate", path);
    if (out.p1 <= 0.0) fail(path + ".shape", "must be positive");
    if (out.p2 <= 0.0) fail(path + ".rate", "must be positive");
  } else {
    fail(path + ".family",
         "unknown scalar family '" + family +
             "' (supported: gaussian, exponential, gamma; only absolutely continuous "
             "laws are admitted)");
  }
  return out;
}

}  // namespace

void expect_keys(const Json& j, std::initializer_list<const char*> allowed,
                 const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) fail(path, "unknown field '" + key + "'");
  }
}

ModelPtr parse_model(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  if (!j.contains("family")) fail(path, "missing field 'family'");
  expect_keys(j, {"family", "dim", "params"}, path);
  const std::string family = j["family"].get<std::string>();
  const Json params = j.contains("params") ? j["params"] : Json::object();
  const std::string ppath = path + ".params";

  if (family == "gaussian") {
    expect_keys(params, {"mean", "cov"}, ppath);
    Vector mean = get_vector(params.contains("mean") ? params["mean"] : Json::array(),
                             ppath + ".mean");
    if (!params.contains("mean")) fail(ppath, "missing field 'mean'");
    if (!params.contains("cov")) fail(ppath, "missing field 'cov'");
    Matrix cov = get_matrix(params["cov"], ppath + ".cov");
    const int dim = get_int(j, "dim", path);
    if (mean.size() != dim) fail(ppath + ".mean", "length does not match dim");
    return make_gaussian(std::move(mean), std::move(cov));
  }
  if (family == "product") {
    expect_keys(params, {"components"}, ppath);
    if (!params.contains("components")) fail(ppath, "missing field 'components'");
    const Json& comps = params["components"];
    if (!comps.is_array() || comps.empty()) fail(ppath + ".components", "expected a non-empty array");
    std::vector<ScalarFamily> components;
    for (std::size_t i = 0; i < comps.size(); ++i)
      components.push_back(
          parse_scalar_family(comps[i], ppath + ".components[" + std::to_string(i) + "]"));
    const int dim = get_int(j, "dim", path);
    if (static_cast<int>(components.size()) != dim)
      fail(ppath + ".components", "count does not match dim");
    return make_product(std::move(components));
  }
  fail(path + ".family",
       "unknown family '" + family +
           "' (supported: gaussian, product; lattice and discrete laws are rejected "
           "because the construction needs an absolutely continuous base)");
}

Json model_to_json(const CumulantModel& model) {
  Json j;
  if (auto gauss = dynamic_cast<const GaussianModel*>(&model)) {
    j["family"] = "gaussian";
    j["dim"] = gauss->dim();
    Json mean = Json::array();
    for (int i = 0; i < gauss->dim(); ++i) mean.push_back(gauss->mean_vector()(i));
    Json cov = Json::array();
    for (int r = 0; r < gauss->dim(); ++r) {
      Json row = Json::array();
      for (int c = 0; c < gauss->dim(); ++c) row.push_back(gauss->covariance_matrix()(r, c));
      cov.push_back(row);
    }
    j["params"] = {{"mean", mean}, {"cov", cov}};
    return j;
  }
  if (auto product = dynamic_cast<const ProductModel*>(&model)) {
    j["family"] = "product";
    j["dim"] = product->dim();
    Json comps = Json::array();
    for (const auto& c : product->components()) {
      Json cj;
      cj["family"] = c.name();
      switch (c.kind) {
        case ScalarFamily::Kind::Gaussian:
          cj["mean"] = c.p1;
          cj["sigma"] = c.p2;
          break;
        case ScalarFamily::Kind::Exponential: cj["rate"] = c.p1; break;
        case ScalarFamily::Kind::Gamma:
          cj["shape"] = c.p1;
          cj["rate"] = c.p2;
          break;
      }
      comps.push_back(cj);
    }
    j["params"] = {{"components", comps}};
    return j;
  }
  throw ConfigError("model_to_json: unsupported model type " + model.describe());
}

SpecFile parse_spec_file(const Json& j) {
  if (!j.is_object()) fail("spec", "expected an object");
  expect_keys(j, {"mode", "n", "k", "target", "model", "umap"}, "spec");
  SpecFile out;
  out.raw = j;
  if (!j.contains("mode")) fail("spec", "missing field 'mode'");
  out.mode = j["mode"].get<std::string>();
  if (out.mode != "sum" && out.mode != "u") fail("spec.mode", "must be \"sum\" or \"u\"");
  out.n = get_int(j, "n", "spec");
  out.k = get_int(j, "k", "spec");
  if (!j.contains("model")) fail("spec", "missing field 'model'");
  out.model = parse_model(j["model"], "spec.model");
  if (j.contains("target")) out.target = get_vector(j["target"], "spec.target");

  if (out.mode == "u") {
    if (!j.contains("umap")) fail("spec", "mode \"u\" requires field 'umap'");
    const Json& u = j["umap"];
    expect_keys(u, {"kind", "matrix"}, "spec.umap");
    if (!u.contains("kind")) fail("spec.umap", "missing field 'kind'");
    const std::string kind = u["kind"].get<std::string>();
    if (kind == "identity") {
      out.umap = UMapSpec::identity();
    } else if (kind == "linear") {
      if (!u.contains("matrix")) fail("spec.umap", "linear umap requires field 'matrix'");
      out.umap = UMapSpec::linear(get_matrix(u["matrix"], "spec.umap.matrix"));
    } else {
      fail("spec.umap.kind", "unknown kind '" + kind + "' (supported: identity, linear)");
    }
  } else if (j.contains("umap")) {
    fail("spec", "field 'umap' is only valid with mode \"u\"");
  }
  return out;
}

ConditioningSpec parse_spec(const Json& j, bool require_target) {
  SpecFile file = parse_spec_file(j);
  if (!file.target) {
    if (require_target) fail("spec", "missing field 'target'");
    file.target = Vector();
  }
  if (file.mode == "sum")
    return ConditioningSpec::sum(file.model, file.n, file.k, *file.target);
  return ConditioningSpec::function_u(file.model, file.umap, file.n, file.k, *file.target);
}

SpecFile load_spec_file(const std::string& path) { return parse_spec_file(load_json_file(path)); }

std::string trajectory_to_jsonl(const Trajectory& trajectory) {
  Json j;
  Json steps = Json::array();
  for (const Vector& y : trajectory.steps) {
    Json row = Json::array();
    for (int i = 0; i < y.size(); ++i) row.push_back(y(i));
    steps.push_back(row);
  }
  j["steps"] = steps;
  if (trajectory.log_g)
    j["log_g"] = *trajectory.log_g;
  else
    j["log_g"] = nullptr;
  j["per_step"] = trajectory.per_step;
  return j.dump();
}

Trajectory trajectory_from_jsonl(const std::string& line, int expected_dim) {
  Json j = Json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ConfigError("trajectory record: invalid JSON");
  expect_keys(j, {"steps", "log_g", "per_step"}, "trajectory");
  if (!j.contains("steps")) fail("trajectory", "missing field 'steps'");
  Trajectory out;
  for (std::size_t i = 0; i < j["steps"].size(); ++i) {
    Vector y = get_vector(j["steps"][i], "trajectory.steps[" + std::to_string(i) + "]");
    if (y.size() != expected_dim)
      fail("trajectory.steps[" + std::to_string(i) + "]", "dimension does not match the model");
    out.steps.push_back(std::move(y));
  }
  if (j.contains("log_g") && j["log_g"].is_number()) out.log_g = j["log_g"].get<double>();
  if (j.contains("per_step")) {
    for (const auto& v : j["per_step"]) out.per_step.push_back(v.get<double>());
  }
  return out;
}

std::vector<Trajectory> read_trajectories(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory file: " + path);
  std::vector<Trajectory> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(trajectory_from_jsonl(line, expected_dim));
  }
  return out;
}

void write_trajectories(const std::string& path, const std::vector<Trajectory>& batch) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  for (const Trajectory& t : batch) out << trajectory_to_jsonl(t) << '\n';
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + ": invalid JSON");
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << content;
}

}  // namespace condwalk
