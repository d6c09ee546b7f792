#pragma once

#include <string>
#include <utility>

#include <json.hpp>

#include "sgan/gan.hpp"
#include "sgan/synthdata.hpp"

namespace sgan {

using json = nlohmann::json;

// tensors / params
json to_json(const Tensor& t);
Tensor tensor_from_json(const json& j);
json to_json(const ad::NamedTensors& p);
ad::NamedTensors named_tensors_from_json(const json& j);

// nets
json to_json(const nets::LayerSpec& s);
nets::LayerSpec layer_from_json(const json& j);
json to_json(const std::vector<nets::LayerSpec>& specs);
std::vector<nets::LayerSpec> layers_from_json(const json& j);
json to_json(const nets::AdamConfig& c);
nets::AdamConfig adam_config_from_json(const json& j);
json to_json(const nets::AdamState& st);
nets::AdamState adam_state_from_json(const json& j);

// gan
json to_json(const gan::TrainConfig& cfg);
gan::TrainConfig train_config_from_json(const json& j);
json to_json(const gan::EnsembleState& st);
gan::EnsembleState ensemble_from_json(const json& j);

// synthdata
json to_json(const synth::MixtureSpec& spec);
synth::MixtureSpec mixture_from_json(const json& j);

// checkpoint file: config + full training state
void save_checkpoint(const std::string& path, const gan::TrainConfig& cfg,
                     const gan::EnsembleState& st);
std::pair<gan::TrainConfig, gan::EnsembleState> load_checkpoint(const std::string& path);

}  // namespace sgan
