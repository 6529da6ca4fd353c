#pragma once

#include <filesystem>

#include "edgerl/fed/model.hpp"

namespace edgerl::fed {

// Global-model checkpoint: base layers plus every head bank, same binary
// tensor encoding as agent checkpoints. Warm starts load these.
void save_global(const std::filesystem::path& path, const GlobalModel& model);
GlobalModel load_global(const std::filesystem::path& path);

}  // namespace edgerl::fed
