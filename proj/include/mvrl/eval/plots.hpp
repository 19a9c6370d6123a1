#pragma once

#include <string>
#include <vector>

#include "mvrl/core/image.hpp"
#include "mvrl/sim/renderer.hpp"

namespace mvrl::eval {

// 5x7 bitmap text; lowercase is rendered uppercase, unknown glyphs as blanks.
void draw_text(Image8& img, int x, int y, const std::string& text, sim::Rgb color, int scale = 1);

Image8 bar_chart(const std::string& title, const std::vector<std::string>& labels,
                 const std::vector<double>& values01, int width = 560, int height = 360);

Image8 line_chart(const std::string& title, const std::vector<std::string>& labels,
                  const std::vector<double>& values01, int width = 560, int height = 360);

}  // namespace mvrl::eval
