#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "roomfit/geometry.hpp"
#include "roomfit/rng.hpp"

namespace roomfit {

// Structured error for grid / manifest / image parsing; the message names the
// offending field.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense multi-channel float grid, row-major, channel-interleaved.
class DenseGrid {
 public:
  DenseGrid() = default;
  DenseGrid(int height, int width, int channels, float fill = 0.0f)
      : height_(height), width_(width), channels_(channels),
        data_(static_cast<std::size_t>(height) * width * channels, fill) {
    if (height < 1 || width < 1 || channels < 1)
      throw std::invalid_argument("DenseGrid: dimensions must be positive");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  float& at(int y, int x, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int y, int x, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool operator==(const DenseGrid& o) const = default;

 private:
  int height_ = 0, width_ = 0, channels_ = 0;
  std::vector<float> data_;
};

// One pyramid level: features (D channels), feature confidence, edge map and
// edge confidence, all sharing the same grid size. `scale` is this level's
// width over the full image width.
struct LevelMaps {
  DenseGrid features;
  DenseGrid feat_conf;
  DenseGrid edge;
  DenseGrid edge_conf;
  double scale = 1.0;

  int width() const { return features.width(); }
  int height() const { return features.height(); }
};

// Exactly three levels, coarse -> medium -> fine.
struct Pyramid {
  std::array<LevelMaps, 3> levels;
};

// Bilinear interpolation of the four surrounding pixels; nullopt outside
// [0, W-1] x [0, H-1].
std::optional<Eigen::VectorXd> bilinear_sample(const DenseGrid& grid, const Vec2& p);
// Non-allocating variant; `out` must hold grid.channels() doubles.
bool bilinear_sample_into(const DenseGrid& grid, const Vec2& p, double* out);

// Spatial derivative of the bilinear surface (piecewise constant per cell),
// channels x 2 with columns (d/dx, d/dy).
std::optional<Eigen::MatrixX2d> bilinear_gradient(const DenseGrid& grid, const Vec2& p);
bool bilinear_gradient_into(const DenseGrid& grid, const Vec2& p, double* ddx, double* ddy);

// k distinct pixels drawn without replacement with probability proportional
// to conf^gamma, by the exponential-keys method. Pixels with conf <= 0 never
// appear. Output is sorted by row-major index. Throws std::invalid_argument
// when fewer than k pixels have positive confidence.
std::vector<Eigen::Vector2i> guided_sample(const DenseGrid& conf, int k, double gamma, Rng& rng);

// Exact box-filter (area-average) resampling to an arbitrary size.
DenseGrid area_resample(const DenseGrid& src, int out_h, int out_w);

// Photometric mode: features are the area-downsampled RGB image, feature
// confidence is one everywhere, edge maps are zero so the edge cost vanishes.
Pyramid photometric_pyramid(const DenseGrid& image, const std::array<double, 3>& level_scales);

// DGRD container, bit-exact:
//   "DGRD" | u32 version=1 | u32 height | u32 width | u32 channels |
//   h*w*c float32, row-major, channel-interleaved. All little-endian,
//   no padding, no trailing bytes.
DenseGrid load_grid(const std::filesystem::path& path);
void save_grid(const DenseGrid& grid, const std::filesystem::path& path);
DenseGrid decode_grid(const std::uint8_t* bytes, std::size_t size, const std::string& origin);
std::vector<std::uint8_t> encode_grid(const DenseGrid& grid);

}  // namespace roomfit
