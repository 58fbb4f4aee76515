#pragma once

#include <filesystem>

#include "json.hpp"

#include "clip/model.hpp"
#include "clip/nn.hpp"

namespace clip {

/// Version tag written into every checkpoint.
inline constexpr int kCheckpointVersion = 1;

// MLP layout: {"activation": "relu", "layers": [{"in": i, "out": o,
// "weight": [o*i row-major, out x in], "bias": [o]}]}.
nlohmann::json mlp_to_json(const MlpParams& p);
MlpParams mlp_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ClipConfig& c);
ClipConfig config_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const ClipModel& m);
ClipModel model_from_json(const nlohmann::json& j);

void save_model(const ClipModel& m, const std::filesystem::path& path);
ClipModel load_model(const std::filesystem::path& path);

}  // namespace clip
