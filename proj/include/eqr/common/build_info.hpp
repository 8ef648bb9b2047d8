#pragma once

#include <filesystem>
#include <string_view>

namespace eqr {

std::string_view engine_version();

/// Shipped data directory (aliases, prompts, rubric, question bank).
/// The EQR_DATA_DIR environment variable overrides the compiled-in default.
std::filesystem::path default_data_dir();

}  // namespace eqr
