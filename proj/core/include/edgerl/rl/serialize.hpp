#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "edgerl/rl/network.hpp"

namespace edgerl::rl {

// Compact binary network format: a tagged list of named layer tensors
// (layer1, layer2, value, head_res, head_bs, head_mt or head_joint) plus the
// action-space dimensions. Doubles are written verbatim in little-endian
// order, so round-trips are bit-exact. This is both the checkpoint format
// and the federation payload.
std::vector<std::uint8_t> serialize_network(const AgentNetwork& net);
AgentNetwork deserialize_network(const std::vector<std::uint8_t>& bytes);

void save_network(const std::filesystem::path& path, const AgentNetwork& net);
AgentNetwork load_network(const std::filesystem::path& path);

}  // namespace edgerl::rl
