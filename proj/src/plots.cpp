#include "mvrl/eval/plots.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace mvrl::eval {

namespace {

// 5x7 glyphs, one byte per row, low 5 bits used
const std::map<char, std::array<uint8_t, 7>>& font() {
  static const std::map<char, std::array<uint8_t, 7>> f = {
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
      {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
      {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
      {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
      {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
      {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
      {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
      {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
      {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11}},
      {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
      {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
      {' ', {0, 0, 0, 0, 0, 0, 0}},
      {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
      {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
      {'%', {0x19, 0x19, 0x02, 0x04, 0x08, 0x13, 0x13}},
      {'[', {0x0E, 0x08, 0x08, 0x08, 0x08, 0x08, 0x0E}},
      {']', {0x0E, 0x02, 0x02, 0x02, 0x02, 0x02, 0x0E}},
      {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
      {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
      {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
      {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
  };
  return f;
}

void put_px(Image8& img, int x, int y, sim::Rgb c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  img.at(x, y, 0) = c.r;
  img.at(x, y, 1) = c.g;
  img.at(x, y, 2) = c.b;
}

void fill_rect(Image8& img, int x0, int y0, int x1, int y1, sim::Rgb c) {
  for (int y = std::max(0, y0); y <= std::min(img.height - 1, y1); ++y)
    for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x) put_px(img, x, y, c);
}

void draw_line(Image8& img, int x0, int y0, int x1, int y1, sim::Rgb c) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    put_px(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

Image8 blank_canvas(int width, int height) {
  Image8 img(width, height, 3, 255);
  return img;
}

constexpr sim::Rgb kAxis{60, 60, 60};
constexpr sim::Rgb kBar{66, 110, 190};
constexpr sim::Rgb kLine{190, 80, 50};
constexpr sim::Rgb kText{20, 20, 20};

struct Frame {
  int left, right, top, bottom;
};

Frame draw_frame(Image8& img, const std::string& title) {
  Frame fr{56, img.width - 16, 34, img.height - 44};
  draw_text(img, 12, 10, title, kText, 1);
  draw_line(img, fr.left, fr.top, fr.left, fr.bottom, kAxis);
  draw_line(img, fr.left, fr.bottom, fr.right, fr.bottom, kAxis);
  for (int tick = 0; tick <= 4; ++tick) {
    const int y = fr.bottom - tick * (fr.bottom - fr.top) / 4;
    draw_line(img, fr.left - 3, y, fr.left, y, kAxis);
    draw_text(img, 14, y - 3, std::to_string(tick * 25) + "%", kText, 1);
  }
  return fr;
}

}  // namespace

void draw_text(Image8& img, int x, int y, const std::string& text, sim::Rgb color, int scale) {
  int cx = x;
  for (char raw : text) {
    const char ch = char(std::toupper(static_cast<unsigned char>(raw)));
    auto it = font().find(ch);
    if (it != font().end()) {
      for (int row = 0; row < 7; ++row)
        for (int col = 0; col < 5; ++col)
          if (it->second[size_t(row)] & (1 << (4 - col)))
            for (int dy = 0; dy < scale; ++dy)
              for (int dx = 0; dx < scale; ++dx)
                put_px(img, cx + col * scale + dx, y + row * scale + dy, color);
    }
    cx += 6 * scale;
  }
}

Image8 bar_chart(const std::string& title, const std::vector<std::string>& labels,
                 const std::vector<double>& values01, int width, int height) {
  Image8 img = blank_canvas(width, height);
  const Frame fr = draw_frame(img, title);
  const int n = int(values01.size());
  if (n == 0) return img;
  const int span = fr.right - fr.left;
  const int slot = span / n;
  for (int i = 0; i < n; ++i) {
    const double v = std::clamp(values01[size_t(i)], 0.0, 1.0);
    const int x0 = fr.left + i * slot + slot / 6;
    const int x1 = fr.left + (i + 1) * slot - slot / 6;
    const int y0 = fr.bottom - int(std::lround(v * (fr.bottom - fr.top)));
    fill_rect(img, x0, y0, x1, fr.bottom - 1, kBar);
    const std::string pct = std::to_string(int(std::lround(v * 100))) + "%";
    draw_text(img, (x0 + x1) / 2 - int(pct.size()) * 3, y0 - 10, pct, kText, 1);
    if (i < int(labels.size()))
      draw_text(img, fr.left + i * slot + 4, fr.bottom + 8, labels[size_t(i)], kText, 1);
  }
  return img;
}

Image8 line_chart(const std::string& title, const std::vector<std::string>& labels,
                  const std::vector<double>& values01, int width, int height) {
  Image8 img = blank_canvas(width, height);
  const Frame fr = draw_frame(img, title);
  const int n = int(values01.size());
  if (n == 0) return img;
  const int span = fr.right - fr.left;
  int prev_x = 0, prev_y = 0;
  for (int i = 0; i < n; ++i) {
    const double v = std::clamp(values01[size_t(i)], 0.0, 1.0);
    const int x = n == 1 ? fr.left + span / 2 : fr.left + i * span / (n - 1);
    const int y = fr.bottom - int(std::lround(v * (fr.bottom - fr.top)));
    fill_rect(img, x - 2, y - 2, x + 2, y + 2, kLine);
    if (i > 0) draw_line(img, prev_x, prev_y, x, y, kLine);
    prev_x = x;
    prev_y = y;
    if (i < int(labels.size()))
      draw_text(img, x - int(labels[size_t(i)].size()) * 3, fr.bottom + 8, labels[size_t(i)],
                kText, 1);
  }
  return img;
}

}  // namespace mvrl::eval
