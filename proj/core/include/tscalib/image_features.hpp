#ifndef TSCALIB_IMAGE_FEATURES_HPP
#define TSCALIB_IMAGE_FEATURES_HPP

#include <cstdint>
#include <vector>

#include "tscalib/geometry.hpp"

namespace tscalib {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // row-major, width * height
  double timestamp = 0.0;

  std::uint8_t at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  void set(int x, int y, std::uint8_t v) {
    values[static_cast<std::size_t>(y) * width + x] = v;
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  static GrayImage zeros(int width, int height) {
    GrayImage img;
    img.width = width;
    img.height = height;
    img.values.assign(static_cast<std::size_t>(width) * height, 0);
    return img;
  }
};

/// Interleaved 8-bit RGB.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // row-major, 3 * width * height
  double timestamp = 0.0;
};

struct LineSegment2D {
  double u0 = 0.0, v0 = 0.0;
  double u1 = 0.0, v1 = 0.0;

  double length() const { return std::hypot(u1 - u0, v1 - v0); }
};

/// Inverse-distance-transformed line-feature field. 255 on line pixels,
/// round(255 * decay^d) at exact Euclidean pixel distance d elsewhere.
struct GrayMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;
  double decay = 0.0;

  std::uint8_t at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
};

struct ImageFeatureConfig {
  double canny_low = 50.0;
  double canny_high = 150.0;
  double min_segment_length = 30.0;  // pixels
  double idt_decay = 0.98;
  /// Test hook: treat nonzero input pixels as line pixels and skip the
  /// Canny / segment stages (synthetic scenes emit ideal line masks).
  bool input_is_line_mask = false;
};

/// ITU-R 601 luma, rounded.
GrayImage to_grayscale(const ColorImage& rgb);

/// Classic Canny: 5x5 Gaussian blur (sigma 1.4), Sobel gradients,
/// 4-direction non-maximum suppression, hysteresis. Thresholds apply to
/// the raw Sobel L2 magnitude. Output mask holds 255 on edges.
GrayImage canny_edges(const GrayImage& img, double low, double high);

/// Straight segments traced from 8-connected edge chains; chains split
/// until every supporting pixel sits within 1.5 px of the fitted line.
std::vector<LineSegment2D> detect_line_segments(const GrayImage& edges,
                                                double min_length);

GrayMap rasterize_and_idt(const std::vector<LineSegment2D>& segments,
                          int width, int height, double decay);

/// IDT of an existing 0/255 mask (the line-mask ingestion path).
GrayMap mask_to_idt(const GrayImage& mask, double decay);

/// Exact squared Euclidean distance to the nearest nonzero mask pixel,
/// per pixel; -1 where the mask is empty. Two-pass lower-envelope scan.
std::vector<std::int64_t> squared_distance_field(
    const std::vector<std::uint8_t>& mask, int width, int height);

/// Full image pipeline: grayscale image to GrayMap, honoring the
/// line-mask hook.
GrayMap build_gray_map(const GrayImage& image, const ImageFeatureConfig& cfg);

}  // namespace tscalib

#endif  // TSCALIB_IMAGE_FEATURES_HPP
