#pragma once

// Tiny static SVG builder for the figure exports. No scripts, no external
// assets; coordinates are written with two decimals so output is stable.

#include <string>
#include <string_view>

#include <fmt/format.h>

namespace transferscope::svg {

inline std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

class Canvas {
 public:
  Canvas(double width, double height) : width_(width), height_(height) {
    body_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
        "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"11\">\n",
        width, height, width, height);
    body_ += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n",
                         width, height);
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke = "black",
            double width = 1.0) {
    body_ += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
        "stroke-width=\"{:.2f}\"/>\n",
        x1, y1, x2, y2, stroke, width);
  }

  void circle(double cx, double cy, double r, std::string_view fill) {
    body_ += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\"/>\n", cx, cy,
                         r, fill);
  }

  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view stroke = "none") {
    body_ += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" "
        "stroke=\"{}\"/>\n",
        x, y, w, h, fill, stroke);
  }

  // `points` is an SVG points list ("x,y x,y ...").
  void polygon(std::string_view points, std::string_view fill, double opacity = 1.0) {
    body_ += fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"{:.2f}\"/>\n", points,
                         fill, opacity);
  }

  void polyline(std::string_view points, std::string_view stroke, double width = 1.5) {
    body_ += fmt::format(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{:.2f}\"/>\n", points,
        stroke, width);
  }

  void text(double x, double y, std::string_view content, std::string_view anchor = "start",
            double rotate = 0.0) {
    if (rotate != 0.0)
      body_ += fmt::format(
          "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" "
          "transform=\"rotate({:.0f} {:.2f} {:.2f})\">{}</text>\n",
          x, y, anchor, rotate, x, y, escape(content));
    else
      body_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\">{}</text>\n", x, y,
                           anchor, escape(content));
  }

  double width() const { return width_; }
  double height() const { return height_; }

  std::string finish() const { return body_ + "</svg>\n"; }

 private:
  double width_;
  double height_;
  std::string body_;
};

}  // namespace transferscope::svg
