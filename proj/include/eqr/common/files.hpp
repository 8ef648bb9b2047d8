#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace eqr {

/// Reads a whole file as bytes. Throws Error(StorageFailure) when unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes via a uniquely named temporary sibling and rename(2), so readers
/// observe either the old content or the complete new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace eqr
