#pragma once

#include <optional>
#include <vector>

#include "roomfit/densemaps.hpp"
#include "roomfit/geometry.hpp"

namespace roomfit {

// 2D line segment in pixel coordinates.
struct LineSegment {
  Vec2 p1;
  Vec2 p2;
  Vec2 midpoint() const { return 0.5 * (p1 + p2); }
};

// Ground-truth 2D-3D correspondence: `pixel` in image `image` observes the
// world point `point` on the room surface.
struct Correspondence {
  int image = 0;
  Vec2 pixel;
  Vec3 point;
};

struct Frame {
  Camera camera;
  Pyramid pyramid;
  std::vector<LineSegment> lines;
};

// Everything one fit consumes: posed frames with map pyramids, optional line
// segments, optional ground truth for evaluation.
struct Scene {
  std::vector<Frame> frames;
  std::vector<Correspondence> gt_correspondences;
  std::optional<Cuboid> gt_cuboid;

  bool has_lines() const {
    for (const auto& f : frames)
      if (!f.lines.empty()) return true;
    return false;
  }

  std::vector<Camera> cameras() const {
    std::vector<Camera> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(f.camera);
    return out;
  }
};

// Ordered posed-frame stream for sequential multi-room estimation. Cameras
// are cheap to query; full frames may be produced lazily (rendered or loaded
// from disk on demand).
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::size_t size() const = 0;
  virtual Camera camera(std::size_t i) const = 0;
  virtual Frame frame(std::size_t i) const = 0;
};

// In-memory adapter.
class SceneFrameSource : public FrameSource {
 public:
  explicit SceneFrameSource(Scene scene) : scene_(std::move(scene)) {}
  std::size_t size() const override { return scene_.frames.size(); }
  Camera camera(std::size_t i) const override { return scene_.frames[i].camera; }
  Frame frame(std::size_t i) const override { return scene_.frames[i]; }

 private:
  Scene scene_;
};

}  // namespace roomfit
