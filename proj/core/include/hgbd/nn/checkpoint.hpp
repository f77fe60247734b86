#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "hgbd/nn/tape.hpp"

namespace hgbd::nn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * File layout: one line of JSON, a newline, then every parameter's values
 * as little-endian float64 in manifest order.  The header carries
 * "architecture", "seed", "meta" (caller supplied) and "manifest", a list of
 * {name, rows, cols}.
 */
void save_checkpoint(const std::filesystem::path& path, const std::vector<Parameter*>& params,
                     const nlohmann::json& architecture, std::uint64_t seed,
                     const nlohmann::json& meta = nlohmann::json::object());

/// Reads the header only.
nlohmann::json read_checkpoint_header(const std::filesystem::path& path);

/// Loads values into `params`; names and shapes must match the manifest
/// exactly.  Returns the header.
nlohmann::json load_checkpoint(const std::filesystem::path& path, const std::vector<Parameter*>& params);

}  // namespace hgbd::nn
