#include "tscalib/image_features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

#include "tscalib/errors.hpp"

namespace tscalib {

namespace {

constexpr std::int64_t kNoSeed = std::numeric_limits<std::int64_t>::max();

int clamp_coord(int v, int lo, int hi) { return std::clamp(v, lo, hi); }

std::vector<double> gaussian_blur_5x5(const GrayImage& img, double sigma) {
  std::array<double, 5> k;
  double sum = 0.0;
  for (int i = -2; i <= 2; ++i) {
    k[i + 2] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + 2];
  }
  for (auto& v : k) v /= sum;

  const int w = img.width;
  const int h = img.height;
  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -2; i <= 2; ++i) {
        acc += k[i + 2] * img.at(clamp_coord(x + i, 0, w - 1), y);
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -2; i <= 2; ++i) {
        acc += k[i + 2] * tmp[static_cast<std::size_t>(clamp_coord(y + i, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

struct Gradients {
  std::vector<double> magnitude;
  std::vector<double> gx;
  std::vector<double> gy;
};

Gradients sobel(const std::vector<double>& img, int w, int h) {
  Gradients g;
  g.magnitude.assign(static_cast<std::size_t>(w) * h, 0.0);
  g.gx.assign(static_cast<std::size_t>(w) * h, 0.0);
  g.gy.assign(static_cast<std::size_t>(w) * h, 0.0);
  auto px = [&](int x, int y) {
    return img[static_cast<std::size_t>(clamp_coord(y, 0, h - 1)) * w +
               clamp_coord(x, 0, w - 1)];
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double gx = px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1) -
                  px(x - 1, y - 1) - 2.0 * px(x - 1, y) - px(x - 1, y + 1);
      double gy = px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1) -
                  px(x - 1, y - 1) - 2.0 * px(x, y - 1) - px(x + 1, y - 1);
      std::size_t idx = static_cast<std::size_t>(y) * w + x;
      g.gx[idx] = gx;
      g.gy[idx] = gy;
      g.magnitude[idx] = std::hypot(gx, gy);
    }
  }
  return g;
}

}  // namespace

GrayImage to_grayscale(const ColorImage& rgb) {
  if (rgb.width <= 0 || rgb.height <= 0 || rgb.values.empty()) {
    throw CalibError(ErrorCode::EmptyImage, "empty color image");
  }
  GrayImage out = GrayImage::zeros(rgb.width, rgb.height);
  out.timestamp = rgb.timestamp;
  const std::size_t n = static_cast<std::size_t>(rgb.width) * rgb.height;
  for (std::size_t i = 0; i < n; ++i) {
    double luma = 0.299 * rgb.values[3 * i] + 0.587 * rgb.values[3 * i + 1] +
                  0.114 * rgb.values[3 * i + 2];
    out.values[i] = static_cast<std::uint8_t>(
        std::clamp(std::lround(luma), 0L, 255L));
  }
  return out;
}

GrayImage canny_edges(const GrayImage& img, double low, double high) {
  if (img.width <= 0 || img.height <= 0) {
    throw CalibError(ErrorCode::EmptyImage, "empty image");
  }
  if (!(low < high) || low < 0.0) {
    throw CalibError(ErrorCode::BadThresholds, "need 0 <= low < high");
  }
  const int w = img.width;
  const int h = img.height;
  std::vector<double> blurred = gaussian_blur_5x5(img, 1.4);
  Gradients g = sobel(blurred, w, h);

  // Non-maximum suppression along the quantized gradient direction. The
  // comparison is >= toward the previous neighbor and > toward the next,
  // which keeps exactly one pixel of a two-pixel plateau.
  std::vector<std::uint8_t> thin(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::size_t idx = static_cast<std::size_t>(y) * w + x;
      double m = g.magnitude[idx];
      if (m <= 0.0) continue;
      double angle = std::atan2(g.gy[idx], g.gx[idx]);
      double deg = angle * 180.0 / 3.14159265358979323846;
      if (deg < 0.0) deg += 180.0;
      int dx = 1, dy = 0;
      if (deg >= 22.5 && deg < 67.5) {
        dx = 1;
        dy = 1;
      } else if (deg >= 67.5 && deg < 112.5) {
        dx = 0;
        dy = 1;
      } else if (deg >= 112.5 && deg < 157.5) {
        dx = -1;
        dy = 1;
      }
      auto mag_at = [&](int xx, int yy) {
        if (xx < 0 || xx >= w || yy < 0 || yy >= h) return 0.0;
        return g.magnitude[static_cast<std::size_t>(yy) * w + xx];
      };
      if (m >= mag_at(x - dx, y - dy) && m > mag_at(x + dx, y + dy)) {
        thin[idx] = 1;
      }
    }
  }

  // Hysteresis: grow from strong pixels through weak ones, 8-connected.
  GrayImage out = GrayImage::zeros(w, h);
  out.timestamp = img.timestamp;
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (thin[idx] && g.magnitude[idx] >= high) {
        out.set(x, y, 255);
        queue.emplace_back(x, y);
      }
    }
  }
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        int nx = x + dx;
        int ny = y + dy;
        if (!out.in_bounds(nx, ny) || out.at(nx, ny)) continue;
        std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
        if (thin[nidx] && g.magnitude[nidx] >= low && g.magnitude[nidx] > 0.0) {
          out.set(nx, ny, 255);
          queue.emplace_back(nx, ny);
        }
      }
    }
  }
  return out;
}

namespace {

struct Chain {
  std::vector<Eigen::Vector2d> pixels;
};

// Walks 8-connected edge chains, preferring the neighbor that continues
// the current heading at junctions. Each pixel joins one chain.
std::vector<Chain> trace_chains(const GrayImage& edges) {
  const int w = edges.width;
  const int h = edges.height;
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
  auto is_edge = [&](int x, int y) {
    return edges.in_bounds(x, y) && edges.at(x, y) != 0;
  };
  auto idx_of = [&](int x, int y) {
    return static_cast<std::size_t>(y) * w + x;
  };
  auto degree = [&](int x, int y) {
    int d = 0;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (is_edge(x + dx, y + dy)) ++d;
      }
    return d;
  };

  std::vector<Chain> chains;
  auto walk = [&](int sx, int sy) {
    Chain chain;
    int x = sx, y = sy;
    double hx = 0.0, hy = 0.0;  // heading
    visited[idx_of(x, y)] = 1;
    chain.pixels.emplace_back(x, y);
    while (true) {
      int best_dx = 0, best_dy = 0;
      double best_score = -2.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int nx = x + dx;
          int ny = y + dy;
          if (!is_edge(nx, ny) || visited[idx_of(nx, ny)]) continue;
          double norm = std::sqrt(static_cast<double>(dx * dx + dy * dy));
          double score = (hx == 0.0 && hy == 0.0)
                             ? 0.0
                             : (hx * dx + hy * dy) / norm;
          // Prefer straight continuation; ties resolved by scan order.
          if (score > best_score + 1e-12) {
            best_score = score;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }
      if (best_dx == 0 && best_dy == 0) break;
      x += best_dx;
      y += best_dy;
      double norm =
          std::sqrt(static_cast<double>(best_dx * best_dx + best_dy * best_dy));
      hx = best_dx / norm;
      hy = best_dy / norm;
      visited[idx_of(x, y)] = 1;
      chain.pixels.emplace_back(x, y);
    }
    return chain;
  };

  // Endpoints first so open curves are traced end to end, then loops.
  for (int pass = 0; pass < 2; ++pass) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!is_edge(x, y) || visited[idx_of(x, y)]) continue;
        if (pass == 0 && degree(x, y) > 1) continue;
        Chain c = walk(x, y);
        if (c.pixels.size() >= 2) chains.push_back(std::move(c));
      }
    }
  }
  return chains;
}

double point_line_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                           const Eigen::Vector2d& b) {
  Eigen::Vector2d d = b - a;
  double len = d.norm();
  if (len < 1e-12) return (p - a).norm();
  return std::abs(d.x() * (a.y() - p.y()) - d.y() * (a.x() - p.x())) / len;
}

void split_chain(const std::vector<Eigen::Vector2d>& pix, std::size_t begin,
                 std::size_t end, double tol,
                 std::vector<std::pair<std::size_t, std::size_t>>& spans) {
  if (end - begin < 2) return;
  const Eigen::Vector2d& a = pix[begin];
  const Eigen::Vector2d& b = pix[end - 1];
  double worst = -1.0;
  std::size_t worst_i = begin;
  for (std::size_t i = begin + 1; i + 1 < end; ++i) {
    double d = point_line_distance(pix[i], a, b);
    if (d > worst) {
      worst = d;
      worst_i = i;
    }
  }
  if (worst > tol) {
    split_chain(pix, begin, worst_i + 1, tol, spans);
    split_chain(pix, worst_i, end, tol, spans);
  } else {
    spans.emplace_back(begin, end);
  }
}

struct FittedLine {
  Eigen::Vector2d point;
  Eigen::Vector2d direction;
};

FittedLine fit_line(const std::vector<Eigen::Vector2d>& pix, std::size_t begin,
                    std::size_t end) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (std::size_t i = begin; i < end; ++i) mean += pix[i];
  mean /= static_cast<double>(end - begin);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (std::size_t i = begin; i < end; ++i) {
    Eigen::Vector2d d = pix[i] - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  Eigen::Vector2d dir = es.eigenvectors().col(1);  // largest eigenvalue
  return {mean, dir.normalized()};
}

}  // namespace

std::vector<LineSegment2D> detect_line_segments(const GrayImage& edges,
                                                double min_length) {
  constexpr double kMaxDeviation = 1.5;  // pixels
  std::vector<LineSegment2D> segments;
  for (const Chain& chain : trace_chains(edges)) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    split_chain(chain.pixels, 0, chain.pixels.size(), kMaxDeviation, spans);
    for (auto [begin, end] : spans) {
      if (end - begin < 2) continue;
      FittedLine line = fit_line(chain.pixels, begin, end);
      double worst = 0.0;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t i = begin; i < end; ++i) {
        Eigen::Vector2d d = chain.pixels[i] - line.point;
        worst = std::max(worst, std::abs(d.x() * line.direction.y() -
                                         d.y() * line.direction.x()));
        double t = d.dot(line.direction);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
      if (worst >= kMaxDeviation) continue;  // residual junction clutter
      LineSegment2D seg;
      Eigen::Vector2d p0 = line.point + lo * line.direction;
      Eigen::Vector2d p1 = line.point + hi * line.direction;
      seg.u0 = p0.x();
      seg.v0 = p0.y();
      seg.u1 = p1.x();
      seg.v1 = p1.y();
      if (seg.length() >= min_length) segments.push_back(seg);
    }
  }
  return segments;
}

std::vector<std::int64_t> squared_distance_field(
    const std::vector<std::uint8_t>& mask, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  // Pass 1: per column, squared distance to the nearest seed row.
  std::vector<std::int64_t> coldist(n, kNoSeed);
  for (int x = 0; x < width; ++x) {
    std::int64_t since = kNoSeed;
    for (int y = 0; y < height; ++y) {
      if (mask[static_cast<std::size_t>(y) * width + x]) since = 0;
      else if (since != kNoSeed) ++since;
      coldist[static_cast<std::size_t>(y) * width + x] = since;
    }
    since = kNoSeed;
    for (int y = height - 1; y >= 0; --y) {
      std::size_t idx = static_cast<std::size_t>(y) * width + x;
      if (mask[idx]) since = 0;
      else if (since != kNoSeed) ++since;
      if (since != kNoSeed && (coldist[idx] == kNoSeed || since < coldist[idx]))
        coldist[idx] = since;
    }
    for (int y = 0; y < height; ++y) {
      std::size_t idx = static_cast<std::size_t>(y) * width + x;
      if (coldist[idx] != kNoSeed) coldist[idx] *= coldist[idx];
    }
  }

  // Pass 2: per row, lower envelope of parabolas (Felzenszwalb/Huttenlocher).
  std::vector<std::int64_t> out(n, kNoSeed);
  std::vector<int> v(width);
  std::vector<double> z(width + 1);
  std::vector<std::int64_t> f(width);
  for (int y = 0; y < height; ++y) {
    bool any = false;
    for (int x = 0; x < width; ++x) {
      f[x] = coldist[static_cast<std::size_t>(y) * width + x];
      if (f[x] != kNoSeed) any = true;
    }
    if (!any) continue;
    int k = -1;
    for (int q = 0; q < width; ++q) {
      if (f[q] == kNoSeed) continue;
      double fq = static_cast<double>(f[q]);
      while (k >= 0) {
        double fp = static_cast<double>(f[v[k]]);
        double s = (fq + static_cast<double>(q) * q - fp -
                    static_cast<double>(v[k]) * v[k]) /
                   (2.0 * (q - v[k]));
        if (s <= z[k]) {
          --k;
        } else {
          break;
        }
      }
      if (k < 0) {
        k = 0;
        v[0] = q;
        z[0] = -std::numeric_limits<double>::infinity();
        z[1] = std::numeric_limits<double>::infinity();
      } else {
        double fp = static_cast<double>(f[v[k]]);
        double s = (fq + static_cast<double>(q) * q - fp -
                    static_cast<double>(v[k]) * v[k]) /
                   (2.0 * (q - v[k]));
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
      }
    }
    int j = 0;
    for (int x = 0; x < width; ++x) {
      while (z[j + 1] < static_cast<double>(x)) ++j;
      std::int64_t dx = static_cast<std::int64_t>(x) - v[j];
      out[static_cast<std::size_t>(y) * width + x] = dx * dx + f[v[j]];
    }
  }
  return out;
}

namespace {

GrayMap idt_from_mask(const std::vector<std::uint8_t>& mask, int width,
                      int height, double decay) {
  GrayMap map;
  map.width = width;
  map.height = height;
  map.decay = decay;
  map.values.assign(static_cast<std::size_t>(width) * height, 0);
  std::vector<std::int64_t> d2 = squared_distance_field(mask, width, height);
  for (std::size_t i = 0; i < d2.size(); ++i) {
    if (d2[i] == kNoSeed) continue;
    double d = std::sqrt(static_cast<double>(d2[i]));
    map.values[i] = static_cast<std::uint8_t>(
        std::lround(255.0 * std::pow(decay, d)));
  }
  return map;
}

void bresenham(std::vector<std::uint8_t>& mask, int width, int height, int x0,
               int y0, int x1, int y1) {
  int dx = std::abs(x1 - x0);
  int dy = -std::abs(y1 - y0);
  int sx = x0 < x1 ? 1 : -1;
  int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (x0 >= 0 && x0 < width && y0 >= 0 && y0 < height) {
      mask[static_cast<std::size_t>(y0) * width + x0] = 1;
    }
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
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

}  // namespace

GrayMap rasterize_and_idt(const std::vector<LineSegment2D>& segments,
                          int width, int height, double decay) {
  if (!(decay > 0.0 && decay < 1.0)) {
    throw CalibError(ErrorCode::BadThresholds, "decay must be in (0,1)");
  }
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(width) * height, 0);
  for (const auto& s : segments) {
    bresenham(mask, width, height, static_cast<int>(std::lround(s.u0)),
              static_cast<int>(std::lround(s.v0)),
              static_cast<int>(std::lround(s.u1)),
              static_cast<int>(std::lround(s.v1)));
  }
  return idt_from_mask(mask, width, height, decay);
}

GrayMap mask_to_idt(const GrayImage& mask, double decay) {
  if (!(decay > 0.0 && decay < 1.0)) {
    throw CalibError(ErrorCode::BadThresholds, "decay must be in (0,1)");
  }
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(mask.width) *
                                     mask.height,
                                 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = mask.values[i] ? 1 : 0;
  }
  return idt_from_mask(bits, mask.width, mask.height, decay);
}

GrayMap build_gray_map(const GrayImage& image, const ImageFeatureConfig& cfg) {
  if (cfg.input_is_line_mask) {
    return mask_to_idt(image, cfg.idt_decay);
  }
  GrayImage edges = canny_edges(image, cfg.canny_low, cfg.canny_high);
  std::vector<LineSegment2D> segments =
      detect_line_segments(edges, cfg.min_segment_length);
  return rasterize_and_idt(segments, image.width, image.height, cfg.idt_decay);
}

}  // namespace tscalib
