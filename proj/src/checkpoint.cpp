#include "dmn/checkpoint.h"

#include "dmn/csv_io.h"

namespace dmn::ad {

nlohmann::json checkpoint_to_json(const ParamMap& params) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, t] : params) {
    j[name] = {{"shape", t.shape()},
               {"values", std::vector<double>(t.values().begin(), t.values().end())}};
  }
  return j;
}

ParamMap checkpoint_from_json(const nlohmann::json& j, bool requires_grad) {
  ParamMap out;
  for (const auto& [name, entry] : j.items()) {
    out.emplace(name, Tensor::from(entry.at("shape").get<Shape>(), entry.at("values").get<std::vector<double>>(),
                                   requires_grad));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ParamMap& params) {
  csv::write_file(path, checkpoint_to_json(params).dump(1) + "\n");
}

ParamMap load_checkpoint(const std::filesystem::path& path, bool requires_grad) {
  return checkpoint_from_json(nlohmann::json::parse(csv::read_file(path)), requires_grad);
}

}  // namespace dmn::ad
