#pragma once

#include <string>
#include <string_view>

namespace onom {

/// Minimal standalone SVG 1.1 writer. Coordinates are printed with two
/// decimals so output is byte-stable across platforms.
class SvgWriter {
 public:
  SvgWriter(double width, double height);

  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view stroke = "none");
  void circle(double cx, double cy, double r, std::string_view fill,
              std::string_view stroke = "none", double stroke_width = 1.0);
  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            double stroke_width = 1.0, std::string_view dash = {});
  /// anchor is "start", "middle" or "end".
  void text(double x, double y, std::string_view content, double font_size,
            std::string_view anchor = "start", std::string_view fill = "#000000",
            double rotate_deg = 0.0);
  void raw(std::string_view fragment);

  std::string finish() const;

  static std::string num(double v);
  static std::string escape(std::string_view s);

 private:
  std::string body_;
  double width_;
  double height_;
};

/// Fixed qualitative palette, cycled by index.
std::string_view palette_color(std::size_t index);

}  // namespace onom
