#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vstep/image.hpp"

namespace vstep {

/// Parses a single binary (P5) or ASCII (P2) PGM with maxval 255.
/// Header comments introduced by '#' are skipped. Throws ParseError.
ImageGrid load_pgm(std::span<const std::uint8_t> bytes);

/// Emits binary P5, maxval 255. Pixels are clamped to [0, 255] and rounded
/// half away from zero.
std::vector<std::uint8_t> save_pgm(const ImageGrid& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

ImageGrid read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const ImageGrid& img);

}  // namespace vstep
