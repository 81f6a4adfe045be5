#include "roomfit/densemaps.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>

namespace roomfit {

namespace {

// Cell selection shared by sample and gradient: clamp so that p == W-1 still
// falls in the last cell.
bool locate(const DenseGrid& g, const Vec2& p, int& x0, int& y0, double& fx, double& fy) {
  const double x = p.x(), y = p.y();
  if (!(x >= 0.0) || !(y >= 0.0) || !(x <= g.width() - 1) || !(y <= g.height() - 1)) return false;
  x0 = std::min(static_cast<int>(x), std::max(g.width() - 2, 0));
  y0 = std::min(static_cast<int>(y), std::max(g.height() - 2, 0));
  fx = g.width() == 1 ? 0.0 : x - x0;
  fy = g.height() == 1 ? 0.0 : y - y0;
  return true;
}

}  // namespace

bool bilinear_sample_into(const DenseGrid& g, const Vec2& p, double* out) {
  int x0, y0;
  double fx, fy;
  if (!locate(g, p, x0, y0, fx, fy)) return false;
  const int x1 = std::min(x0 + 1, g.width() - 1);
  const int y1 = std::min(y0 + 1, g.height() - 1);
  const double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy), w01 = (1 - fx) * fy, w11 = fx * fy;
  for (int c = 0; c < g.channels(); ++c) {
    out[c] = w00 * g.at(y0, x0, c) + w10 * g.at(y0, x1, c) + w01 * g.at(y1, x0, c) +
             w11 * g.at(y1, x1, c);
  }
  return true;
}

std::optional<Eigen::VectorXd> bilinear_sample(const DenseGrid& g, const Vec2& p) {
  Eigen::VectorXd out(g.channels());
  if (!bilinear_sample_into(g, p, out.data())) return std::nullopt;
  return out;
}

bool bilinear_gradient_into(const DenseGrid& g, const Vec2& p, double* ddx, double* ddy) {
  int x0, y0;
  double fx, fy;
  if (!locate(g, p, x0, y0, fx, fy)) return false;
  const int x1 = std::min(x0 + 1, g.width() - 1);
  const int y1 = std::min(y0 + 1, g.height() - 1);
  for (int c = 0; c < g.channels(); ++c) {
    const double g00 = g.at(y0, x0, c), g10 = g.at(y0, x1, c);
    const double g01 = g.at(y1, x0, c), g11 = g.at(y1, x1, c);
    ddx[c] = (1 - fy) * (g10 - g00) + fy * (g11 - g01);
    ddy[c] = (1 - fx) * (g01 - g00) + fx * (g11 - g10);
  }
  return true;
}

std::optional<Eigen::MatrixX2d> bilinear_gradient(const DenseGrid& g, const Vec2& p) {
  Eigen::MatrixX2d out(g.channels(), 2);
  std::vector<double> dx(g.channels()), dy(g.channels());
  if (!bilinear_gradient_into(g, p, dx.data(), dy.data())) return std::nullopt;
  for (int c = 0; c < g.channels(); ++c) {
    out(c, 0) = dx[c];
    out(c, 1) = dy[c];
  }
  return out;
}

std::vector<Eigen::Vector2i> guided_sample(const DenseGrid& conf, int k, double gamma, Rng& rng) {
  if (conf.channels() != 1) throw std::invalid_argument("guided_sample: confidence must be 1-channel");
  if (k < 0) throw std::invalid_argument("guided_sample: k must be non-negative");

  // Weighted reservoir by exponential keys: key = Exp(1) / weight, keep the
  // k smallest. One uniform draw per positive pixel keeps the stream
  // reproducible regardless of k.
  using Entry = std::pair<double, int>;  // key, row-major index
  std::priority_queue<Entry> heap;       // max-heap on key
  int positive = 0;
  for (int y = 0; y < conf.height(); ++y) {
    for (int x = 0; x < conf.width(); ++x) {
      const double c = conf.at(y, x, 0);
      if (!(c > 0.0)) continue;
      ++positive;
      const double u = rng.uniform();
      const double w = gamma == 0.0 ? 1.0 : std::pow(static_cast<double>(c), gamma);
      const double key = -std::log1p(-u) / w;
      const int idx = y * conf.width() + x;
      if (static_cast<int>(heap.size()) < k) {
        heap.emplace(key, idx);
      } else if (!heap.empty() && key < heap.top().first) {
        heap.pop();
        heap.emplace(key, idx);
      }
    }
  }
  if (positive < k)
    throw std::invalid_argument("guided_sample: fewer than k pixels have positive weight");

  std::vector<int> indices;
  indices.reserve(k);
  while (!heap.empty()) {
    indices.push_back(heap.top().second);
    heap.pop();
  }
  std::sort(indices.begin(), indices.end());
  std::vector<Eigen::Vector2i> out;
  out.reserve(indices.size());
  for (int idx : indices) out.emplace_back(idx % conf.width(), idx / conf.width());
  return out;
}

DenseGrid area_resample(const DenseGrid& src, int out_h, int out_w) {
  DenseGrid dst(out_h, out_w, src.channels());
  const double sx = static_cast<double>(src.width()) / out_w;
  const double sy = static_cast<double>(src.height()) / out_h;
  std::vector<double> acc(src.channels());
  for (int oy = 0; oy < out_h; ++oy) {
    const double y_lo = oy * sy, y_hi = (oy + 1) * sy;
    const int iy0 = static_cast<int>(y_lo);
    const int iy1 = std::min(static_cast<int>(std::ceil(y_hi)), src.height());
    for (int ox = 0; ox < out_w; ++ox) {
      const double x_lo = ox * sx, x_hi = (ox + 1) * sx;
      const int ix0 = static_cast<int>(x_lo);
      const int ix1 = std::min(static_cast<int>(std::ceil(x_hi)), src.width());
      std::fill(acc.begin(), acc.end(), 0.0);
      double area = 0.0;
      for (int iy = iy0; iy < iy1; ++iy) {
        const double hy = std::min<double>(iy + 1, y_hi) - std::max<double>(iy, y_lo);
        for (int ix = ix0; ix < ix1; ++ix) {
          const double hx = std::min<double>(ix + 1, x_hi) - std::max<double>(ix, x_lo);
          const double w = hx * hy;
          area += w;
          for (int c = 0; c < src.channels(); ++c) acc[c] += w * src.at(iy, ix, c);
        }
      }
      for (int c = 0; c < src.channels(); ++c)
        dst.at(oy, ox, c) = static_cast<float>(acc[c] / area);
    }
  }
  return dst;
}

Pyramid photometric_pyramid(const DenseGrid& image, const std::array<double, 3>& level_scales) {
  Pyramid pyr;
  for (int l = 0; l < 3; ++l) {
    const int w = std::max(1, static_cast<int>(std::lround(image.width() * level_scales[l])));
    const int h = std::max(1, static_cast<int>(std::lround(image.height() * level_scales[l])));
    LevelMaps& lm = pyr.levels[l];
    lm.features = (w == image.width() && h == image.height()) ? image : area_resample(image, h, w);
    lm.feat_conf = DenseGrid(h, w, 1, 1.0f);
    lm.edge = DenseGrid(h, w, 1, 0.0f);
    lm.edge_conf = DenseGrid(h, w, 1, 0.0f);
    lm.scale = static_cast<double>(w) / image.width();
  }
  return pyr;
}

namespace {

constexpr std::size_t kHeaderSize = 20;
constexpr std::uint32_t kVersion = 1;

std::uint32_t read_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

}  // namespace

DenseGrid decode_grid(const std::uint8_t* bytes, std::size_t size, const std::string& origin) {
  const auto fail = [&](const std::string& what) { throw ParseError(origin + ": " + what); };
  if (size < 4 || std::memcmp(bytes, "DGRD", 4) != 0) fail("bad magic");
  if (size < kHeaderSize) fail("unexpected end of data");
  const std::uint32_t version = read_u32le(bytes + 4);
  if (version != kVersion) fail("unsupported version " + std::to_string(version));
  const std::uint64_t h = read_u32le(bytes + 8);
  const std::uint64_t w = read_u32le(bytes + 12);
  const std::uint64_t c = read_u32le(bytes + 16);
  if (h == 0 || w == 0 || c == 0) fail("zero dimension");
  if (h * w * c > (1ull << 31) / 4) fail("dimension overflow");
  const std::size_t n = static_cast<std::size_t>(h * w * c);
  if (size < kHeaderSize + 4 * n) fail("unexpected end of data");
  if (size > kHeaderSize + 4 * n) fail("trailing bytes");

  DenseGrid grid(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  const std::uint8_t* p = bytes + kHeaderSize;
  for (std::size_t i = 0; i < n; ++i, p += 4) {
    const std::uint32_t bits = read_u32le(p);
    float f;
    std::memcpy(&f, &bits, 4);
    grid.data()[i] = f;
  }
  return grid;
}

std::vector<std::uint8_t> encode_grid(const DenseGrid& grid) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 4 * grid.data().size());
  out.insert(out.end(), {'D', 'G', 'R', 'D'});
  write_u32le(out, kVersion);
  write_u32le(out, static_cast<std::uint32_t>(grid.height()));
  write_u32le(out, static_cast<std::uint32_t>(grid.width()));
  write_u32le(out, static_cast<std::uint32_t>(grid.channels()));
  for (float f : grid.data()) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32le(out, bits);
  }
  return out;
}

DenseGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_grid(bytes.data(), bytes.size(), path.string());
}

void save_grid(const DenseGrid& grid, const std::filesystem::path& path) {
  const auto bytes = encode_grid(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open file for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace roomfit
