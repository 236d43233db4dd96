#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace collage {

/// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* at(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

/// Loads a PNG or JPEG file. Throws IoError on unreadable/undecodable files.
Image load_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG. Throws IoError on failure.
void save_png(const std::filesystem::path& path, const Image& img);

/// Loads every PNG/JPEG in a directory in sorted-filename order.
/// The sorted order defines the episode's input order.
std::vector<Image> load_image_dir(const std::filesystem::path& dir);

}  // namespace collage
