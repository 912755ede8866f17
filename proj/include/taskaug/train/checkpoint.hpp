#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskaug/core/tensor.hpp"
#include "taskaug/gan/generator.hpp"
#include "taskaug/seg/unet.hpp"
#include "taskaug/train/config.hpp"

namespace taskaug::train {

// Binary checkpoint: JSON header (kind + architecture config + tensor
// manifest) followed by raw float32 data, so a reload is bit-exact.
void save_state(const std::string& path, const std::string& kind, const nlohmann::json& config,
                const std::vector<std::pair<std::string, Tensor*>>& tensors);

nlohmann::json read_header(const std::string& path, std::string* kind = nullptr);
void load_state(const std::string& path, const std::map<std::string, Tensor*>& tensors);

void save_generator(const std::string& path, gan::GeneratorNetwork& net);
gan::GeneratorNetwork load_generator(const std::string& path);

void save_segmenter(const std::string& path, seg::SegmentationNetwork& net, int grid);
seg::SegmentationNetwork load_segmenter(const std::string& path, int* grid_out = nullptr);

}  // namespace taskaug::train
