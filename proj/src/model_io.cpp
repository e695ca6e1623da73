#include <json.hpp>

#include "survshap/csv.hpp"
#include "survshap/error.hpp"
#include "survshap/models.hpp"

namespace survshap {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "survshap-model";

json grid_json(const TimeGrid& grid) { return json(std::vector<double>(grid.begin(), grid.end())); }

json cox_json(const CoxModel& m) {
  return {{"coefficients", m.coefficients()},
          {"means", m.means()},
          {"baseline_times", grid_json(m.baseline_chf().grid())},
          {"baseline_chf", std::vector<double>(m.baseline_chf().values().begin(), m.baseline_chf().values().end())}};
}

json forest_json(const RandomSurvivalForest& f) {
  const ForestOptions& o = f.options();
  json trees = json::array();
  for (const SurvivalTree& tree : f.trees()) {
    json nodes = json::array();
    for (const auto& n : tree.nodes()) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf});
    json leaves = json::array();
    for (const auto& l : tree.leaves()) {
      leaves.push_back({{"steps", l.steps}, {"increments", l.increments}, {"samples", l.samples}, {"events", l.events}});
    }
    trees.push_back({{"nodes", std::move(nodes)}, {"leaves", std::move(leaves)}});
  }
  return {{"grid", grid_json(f.event_grid())},
          {"options",
           {{"n_trees", o.n_trees},
            {"min_leaf", o.min_leaf},
            {"max_features", o.max_features},
            {"max_depth", o.max_depth},
            {"seed", o.seed}}},
          {"trees", std::move(trees)}};
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("model file: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file: field '") + key + "': " + e.what());
  }
}

std::unique_ptr<SurvivalModel> cox_from(const json& j, std::vector<std::string> names) {
  auto values = field<std::vector<double>>(j, "baseline_chf");
  StepCurve baseline(TimeGrid(field<std::vector<double>>(j, "baseline_times")), std::move(values),
                     CurveKind::cumulative_hazard);
  return std::make_unique<CoxModel>(std::move(names), field<std::vector<double>>(j, "coefficients"),
                                    field<std::vector<double>>(j, "means"), std::move(baseline));
}

std::unique_ptr<SurvivalModel> forest_from(const json& j, std::vector<std::string> names) {
  const json& o = j.at("options");
  ForestOptions options;
  options.n_trees = field<std::size_t>(o, "n_trees");
  options.min_leaf = field<std::size_t>(o, "min_leaf");
  options.max_features = field<std::size_t>(o, "max_features");
  options.max_depth = field<std::size_t>(o, "max_depth");
  options.seed = field<std::uint64_t>(o, "seed");
  std::vector<SurvivalTree> trees;
  for (const json& t : field<json>(j, "trees")) {
    std::vector<SurvivalTree::Node> nodes;
    for (const json& n : field<json>(t, "nodes")) {
      if (!n.is_array() || n.size() != 5) throw ValidationError("model file: tree node must have 5 entries");
      nodes.push_back({n[0].get<std::int32_t>(), n[1].get<double>(), n[2].get<std::int32_t>(),
                       n[3].get<std::int32_t>(), n[4].get<std::int32_t>()});
    }
    std::vector<SurvivalTree::Leaf> leaves;
    for (const json& l : field<json>(t, "leaves")) {
      leaves.push_back({field<std::vector<std::uint32_t>>(l, "steps"), field<std::vector<double>>(l, "increments"),
                        field<std::uint32_t>(l, "samples"), field<std::uint32_t>(l, "events")});
    }
    trees.emplace_back(std::move(nodes), std::move(leaves));
  }
  return std::make_unique<RandomSurvivalForest>(std::move(names), TimeGrid(field<std::vector<double>>(j, "grid")),
                                                std::move(trees), options);
}

}  // namespace

std::string serialize_model(const SurvivalModel& model) {
  json j = {{"format", kFormatName},
            {"version", kModelFormatVersion},
            {"kind", model.kind()},
            {"feature_names", model.feature_names()}};
  if (const auto* cox = dynamic_cast<const CoxModel*>(&model)) {
    j["cph"] = cox_json(*cox);
  } else if (const auto* forest = dynamic_cast<const RandomSurvivalForest*>(&model)) {
    j["rsf"] = forest_json(*forest);
  } else {
    throw ValidationError("cannot serialize model of kind '" + model.kind() + "'");
  }
  return j.dump() + "\n";
}

std::unique_ptr<SurvivalModel> deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormatName) {
    throw ValidationError("not a survshap model file (missing format tag)");
  }
  const int version = field<int>(j, "version");
  if (version != kModelFormatVersion) {
    throw ValidationError("unsupported model format version " + std::to_string(version));
  }
  const auto kind = field<std::string>(j, "kind");
  auto names = field<std::vector<std::string>>(j, "feature_names");
  try {
    if (kind == "cph") return cox_from(field<json>(j, "cph"), std::move(names));
    if (kind == "rsf") return forest_from(field<json>(j, "rsf"), std::move(names));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
  throw ValidationError("unknown model kind '" + kind + "'");
}

void save_model(const SurvivalModel& model, const std::string& path) { write_text_file(path, serialize_model(model)); }

std::unique_ptr<SurvivalModel> load_model(const std::string& path) { return deserialize_model(read_text_file(path)); }

}  // namespace survshap
