#pragma once

#include <filesystem>

#include "json.hpp"
#include "rdhp/nn.hpp"

namespace rdhp::checkpoint {

inline constexpr int kFormatVersion = 1;

/// {"version": 1, "tensors": {name: {"shape": [...], "data": [...]}}}.
/// Values are written with shortest round-trip formatting, so decode(encode(x))
/// is bit-exact.
nlohmann::json encode(const nn::ParamList& params);

/// Fills every listed parameter; missing names or shape mismatches throw.
void decode(const nlohmann::json& j, const nn::ParamList& params);

void write_json(const std::filesystem::path& path, const nlohmann::json& j, int indent = -1);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace rdhp::checkpoint
