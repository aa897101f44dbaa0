#include "seisint/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "seisint/error.hpp"

namespace seisint {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, _] : j.items()) {
    if (!allowed.contains(k)) throw ValidationError("config: unknown key '" + where + "." + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("config: bad value for '" + where + "." + key + "': " + e.what());
  }
}

json orders_to_json(const std::vector<PowerTerm>& orders) {
  json arr = json::array();
  for (const auto& t : orders) arr.push_back({std::string(feature_source_name(t.source)), t.power});
  return arr;
}

std::vector<PowerTerm> orders_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError("config: '" + where + "' must be a list of [source, power]");
  std::vector<PowerTerm> out;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_number_integer()) {
      throw ValidationError("config: '" + where + "' entries must be [\"magnitude\"|\"depth\", power]");
    }
    out.push_back({parse_feature_source(item[0].get<std::string>()), item[1].get<int>()});
  }
  return out;
}

}  // namespace

void DataConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("data: train_fraction must lie in (0, 1)");
  }
}

void RunConfig::validate() const {
  grid.validate();
  features.validate();
  hybrid.validate();
  model.validate(grid);
  training.validate();
  data.validate();
}

nlohmann::json to_json(const RunConfig& c) {
  return {
      {"grid",
       {{"lat_min_deg", c.grid.lat_min_deg},
        {"lat_max_deg", c.grid.lat_max_deg},
        {"lon_min_deg", c.grid.lon_min_deg},
        {"lon_max_deg", c.grid.lon_max_deg},
        {"n_cells", c.grid.n_cells}}},
      {"features",
       {{"k", c.features.k},
        {"classifier_orders", orders_to_json(c.features.classifier_orders)},
        {"regressor_orders", orders_to_json(c.features.regressor_orders)},
        {"magnitude_scale", c.features.magnitude_scale},
        {"depth_scale", c.features.depth_scale}}},
      {"hybrid", {{"alpha", c.hybrid.alpha}, {"felt_threshold", c.hybrid.felt_threshold}}},
      {"model", {{"conv_filters", c.model.conv_filters}, {"conv_kernel", c.model.conv_kernel}}},
      {"training",
       {{"epochs", c.training.epochs},
        {"batch_size", c.training.batch_size},
        {"learning_rate", c.training.learning_rate},
        {"beta1", c.training.beta1},
        {"beta2", c.training.beta2},
        {"epsilon", c.training.epsilon},
        {"seed", c.training.seed}}},
      {"data",
       {{"train_fraction", c.data.train_fraction},
        {"split_seed", c.data.split_seed},
        {"min_magnitude", c.data.min_magnitude}}},
  };
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  reject_unknown(j, {"grid", "features", "hybrid", "model", "training", "data"}, "config");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    reject_unknown(g, {"lat_min_deg", "lat_max_deg", "lon_min_deg", "lon_max_deg", "n_cells"}, "grid");
    read(g, "lat_min_deg", c.grid.lat_min_deg, "grid");
    read(g, "lat_max_deg", c.grid.lat_max_deg, "grid");
    read(g, "lon_min_deg", c.grid.lon_min_deg, "grid");
    read(g, "lon_max_deg", c.grid.lon_max_deg, "grid");
    read(g, "n_cells", c.grid.n_cells, "grid");
  }
  if (j.contains("features")) {
    const auto& f = j["features"];
    reject_unknown(f, {"k", "classifier_orders", "regressor_orders", "magnitude_scale", "depth_scale"},
                   "features");
    read(f, "k", c.features.k, "features");
    if (f.contains("classifier_orders")) {
      c.features.classifier_orders = orders_from_json(f["classifier_orders"], "features.classifier_orders");
    }
    if (f.contains("regressor_orders")) {
      c.features.regressor_orders = orders_from_json(f["regressor_orders"], "features.regressor_orders");
    }
    read(f, "magnitude_scale", c.features.magnitude_scale, "features");
    read(f, "depth_scale", c.features.depth_scale, "features");
  }
  if (j.contains("hybrid")) {
    const auto& h = j["hybrid"];
    reject_unknown(h, {"alpha", "felt_threshold"}, "hybrid");
    read(h, "alpha", c.hybrid.alpha, "hybrid");
    read(h, "felt_threshold", c.hybrid.felt_threshold, "hybrid");
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    reject_unknown(m, {"conv_filters", "conv_kernel"}, "model");
    read(m, "conv_filters", c.model.conv_filters, "model");
    read(m, "conv_kernel", c.model.conv_kernel, "model");
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    reject_unknown(t, {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "seed"},
                   "training");
    read(t, "epochs", c.training.epochs, "training");
    read(t, "batch_size", c.training.batch_size, "training");
    read(t, "learning_rate", c.training.learning_rate, "training");
    read(t, "beta1", c.training.beta1, "training");
    read(t, "beta2", c.training.beta2, "training");
    read(t, "epsilon", c.training.epsilon, "training");
    read(t, "seed", c.training.seed, "training");
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    reject_unknown(d, {"train_fraction", "split_seed", "min_magnitude"}, "data");
    read(d, "train_fraction", c.data.train_fraction, "data");
    read(d, "split_seed", c.data.split_seed, "data");
    read(d, "min_magnitude", c.data.min_magnitude, "data");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::string canonical_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace seisint
