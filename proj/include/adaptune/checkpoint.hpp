#pragma once

#include "adaptune/adaptors.hpp"
#include "adaptune/optimizer.hpp"

#include <filesystem>
#include <vector>

namespace adaptune {

struct Checkpoint {
    AdaptorSet adaptors;
    std::vector<AdamState> optimizer;  // empty, or one per parameter store
};

/// Writes checkpoint.json plus one headerless little-endian float64 blob per
/// tensor (row-major) into `directory`. Returns the json path.
std::filesystem::path save_checkpoint(const std::filesystem::path& directory, const AdaptorSet& adaptors,
                                      const std::vector<AdamState>& optimizer = {});

Checkpoint load_checkpoint(const std::filesystem::path& json_path);

}  // namespace adaptune
