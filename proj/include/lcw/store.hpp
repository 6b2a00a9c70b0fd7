#pragma once

#include "lcw/workflow.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace lcw {

std::string snapshot_to_json(const ProjectData& data);
/// Throws CorruptSnapshot when the text does not parse or fails validation.
ProjectData snapshot_from_json(const std::string& text);

/// Checks the cross-field invariants a loaded snapshot must satisfy.
void validate_snapshot(const ProjectData& data);

ProjectData load_snapshot(const std::filesystem::path& path);

/// Writes through a temp file and an atomic rename while holding an exclusive
/// lock on "<path>.lock". With `base_version`, the file on disk must still be
/// at that version, otherwise VersionConflict.
void save_snapshot(const std::filesystem::path& path, const ProjectData& data,
                   std::optional<std::uint64_t> base_version = std::nullopt);

}  // namespace lcw
