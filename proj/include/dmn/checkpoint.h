#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "dmn/tensor.h"

namespace dmn::ad {

using ParamMap = std::map<std::string, Tensor>;

/// {"name": {"shape": [...], "values": [...row-major...]}, ...}
nlohmann::json checkpoint_to_json(const ParamMap& params);
ParamMap checkpoint_from_json(const nlohmann::json& j, bool requires_grad = true);

void save_checkpoint(const std::filesystem::path& path, const ParamMap& params);
ParamMap load_checkpoint(const std::filesystem::path& path, bool requires_grad = true);

}  // namespace dmn::ad
