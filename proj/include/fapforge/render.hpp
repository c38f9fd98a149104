#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fapforge/catalog.hpp"
#include "fapforge/item.hpp"

namespace fapforge {

class LayoutError : public Error {
 public:
  using Error::Error;
};

struct RenderStyle {
  int panel_size = 160;  // pixels per square panel
  double stroke_width = 2.0;
  int margin = 12;  // sheet border and gap between cells
};

// Ordinal to visual maps. Each is injective over a domain of n values.
double size_scale(int index, int n);     // fraction of the slot radius, in (0.4, 1]
int gray_level(int index, int n);        // 255 (white) down to 0
int stroke_gray_level(int index, int n); // for outline-only objects, 200 down to 0
double angle_degrees(int index, int n);

// 8-bit grayscale raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
  friend bool operator==(const Image&, const Image&) = default;
};

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(const std::vector<std::uint8_t>& bytes);

// Panels are drawn with the catalog of their profile. Throws LayoutError when
// an entity would leave its slot or its shape has no geometry.
Image render_panel(const PanelSpec& panel, const Catalog& cat, const RenderStyle& style = {});
std::string render_panel_svg(const PanelSpec& panel, const Catalog& cat,
                             const RenderStyle& style = {});

// Context grid with a blank last cell, then the answer strip (2 rows of 4,
// labeled 1-8), then the meta-option boxes when the item carries them.
struct Sheet {
  Image raster;
  std::string svg;
};
Sheet render_item_sheet(const ItemSpec& item, const Catalog& cat, const RenderStyle& style = {});

// Writes <id>_ctx<k>.png, <id>_ans<k>.png, <id>_sheet.png and <id>_sheet.svg
// into `dir`; returns the file names in that order.
std::vector<std::string> write_item_images(const ItemSpec& item, const std::string& id,
                                           const std::filesystem::path& dir, const Catalog& cat,
                                           const RenderStyle& style = {});

}  // namespace fapforge
