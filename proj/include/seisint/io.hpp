#pragma once

#include <filesystem>
#include <span>
#include <string_view>

namespace seisint {

/// Writes `bytes` next to `path`, then renames over it, so readers never see
/// a partial file.
void atomic_write(const std::filesystem::path& path, std::span<const char> bytes);

inline void atomic_write_text(const std::filesystem::path& path, std::string_view text) {
  atomic_write(path, std::span<const char>(text.data(), text.size()));
}

}  // namespace seisint
