#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "docforensics/image.hpp"

namespace docforensics::font {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

/// Seven rows, bit 4 is the leftmost column. Unknown characters render blank.
const std::array<std::uint8_t, kGlyphHeight>& glyph(char c);

struct TextStyle {
  int scale = 2;        // pixel size of one font dot
  int spacing = 1;      // blank font columns between glyphs
  std::uint8_t ink[3] = {30, 30, 40};
};

/// Horizontal advance of one character in pixels.
int advance(const TextStyle& style);

/// Pixel width of a string (no trailing spacing).
int text_width(std::string_view text, const TextStyle& style);
int text_height(const TextStyle& style);

/// Draws text with its top-left corner at (x, y); pixels outside the raster are clipped.
/// Returns the bounding box of the ink actually drawn (w = 0 when nothing was drawn).
Region draw_text(Raster& image, int x, int y, std::string_view text, const TextStyle& style);

}  // namespace docforensics::font
