#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace richards {

struct Vec2 {
  double x = 0.0;
  double z = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.z + b.z}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.z - b.z}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.z}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.z * b.z; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

struct Rect {
  double x0 = 0.0, z0 = 0.0, x1 = 1.0, z1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return z1 - z0; }
};

/// Precomputed per-triangle quantities. grad[i] is the (constant) gradient of
/// the P1 shape function attached to local vertex i.
struct ElementGeometry {
  double area = 0.0;
  std::array<Vec2, 3> grad{};
  Vec2 centroid{};
};

/// Edge on the domain boundary. side: 0 bottom, 1 right, 2 top, 3 left.
struct BoundaryEdge {
  int v0 = -1, v1 = -1;
  int side = -1;
};

/// Conforming triangulation of an axis-aligned rectangle. Each grid cell is
/// split along its bottom-left to top-right diagonal; triangles are oriented
/// counterclockwise. Vertices are numbered row-major from the bottom row.
class Mesh {
 public:
  static Mesh structured(int nx, int nz, Rect r = Rect{}) {
    if (nx < 1 || nz < 1) throw std::invalid_argument("mesh: nx and nz must be >= 1");
    if (!(r.x1 > r.x0) || !(r.z1 > r.z0)) throw std::invalid_argument("mesh: empty rectangle");
    Mesh m;
    m.rect_ = r;
    m.nx_ = nx;
    m.nz_ = nz;
    m.vertices_.reserve(static_cast<std::size_t>(nx + 1) * (nz + 1));
    for (int j = 0; j <= nz; ++j) {
      const double tz = static_cast<double>(j) / nz;
      for (int i = 0; i <= nx; ++i) {
        const double tx = static_cast<double>(i) / nx;
        // Blend form keeps boundary coordinates exact at the rectangle edges.
        m.vertices_.push_back({r.x0 * (1.0 - tx) + r.x1 * tx, r.z0 * (1.0 - tz) + r.z1 * tz});
      }
    }
    auto v = [nx](int i, int j) { return j * (nx + 1) + i; };
    m.elements_.reserve(static_cast<std::size_t>(2) * nx * nz);
    for (int j = 0; j < nz; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int bl = v(i, j), br = v(i + 1, j), tr = v(i + 1, j + 1), tl = v(i, j + 1);
        m.elements_.push_back({bl, br, tr});
        m.elements_.push_back({bl, tr, tl});
      }
    }
    for (int i = 0; i < nx; ++i) m.boundary_.push_back({v(i, 0), v(i + 1, 0), 0});
    for (int j = 0; j < nz; ++j) m.boundary_.push_back({v(nx, j), v(nx, j + 1), 1});
    for (int i = 0; i < nx; ++i) m.boundary_.push_back({v(i, nz), v(i + 1, nz), 2});
    for (int j = 0; j < nz; ++j) m.boundary_.push_back({v(0, j), v(0, j + 1), 3});
    m.finalize();
    return m;
  }

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int element_count() const { return static_cast<int>(elements_.size()); }
  Vec2 vertex(int i) const { return vertices_[i]; }
  const std::array<int, 3>& element(int e) const { return elements_[e]; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  const ElementGeometry& geometry(int e) const { return geometry_[e]; }
  const Rect& rect() const { return rect_; }
  int nx() const { return nx_; }
  int nz() const { return nz_; }

  /// Mesh size h: largest element edge length (the cell diagonal here).
  double diameter() const { return diameter_; }

  Vec2 point(int e, const std::array<double, 3>& bary) const {
    const auto& el = elements_[e];
    Vec2 p{0.0, 0.0};
    for (int k = 0; k < 3; ++k) p = p + bary[k] * vertices_[el[k]];
    return p;
  }

 private:
  void finalize() {
    geometry_.resize(elements_.size());
    diameter_ = 0.0;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
      const Vec2 a = vertices_[elements_[e][0]];
      const Vec2 b = vertices_[elements_[e][1]];
      const Vec2 c = vertices_[elements_[e][2]];
      const double twice = (b.x - a.x) * (c.z - a.z) - (c.x - a.x) * (b.z - a.z);
      if (twice <= 0.0) throw std::logic_error("mesh: non-positive element orientation");
      ElementGeometry g;
      g.area = 0.5 * twice;
      g.grad[0] = {(b.z - c.z) / twice, (c.x - b.x) / twice};
      g.grad[1] = {(c.z - a.z) / twice, (a.x - c.x) / twice};
      g.grad[2] = {(a.z - b.z) / twice, (b.x - a.x) / twice};
      g.centroid = (1.0 / 3.0) * (a + b + c);
      geometry_[e] = g;
      diameter_ = std::max({diameter_, norm(b - a), norm(c - b), norm(a - c)});
    }
  }

  Rect rect_{};
  int nx_ = 0, nz_ = 0;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<ElementGeometry> geometry_;
  double diameter_ = 0.0;
};

/// Named boundary piece selected by a coordinate predicate.
struct BoundaryRegion {
  std::string tag;
  std::function<bool(double, double)> contains;  // (x, z)
};

/// Geometric tolerance used by the built-in region predicates.
inline double boundary_tolerance(const Rect& r) {
  return 1e-12 * std::max(std::abs(r.width()), std::abs(r.height()));
}

inline BoundaryRegion region_side(const Rect& r, int side, std::string tag) {
  const double tol = boundary_tolerance(r);
  switch (side) {
    case 0: return {std::move(tag), [=](double, double z) { return std::abs(z - r.z0) <= tol; }};
    case 1: return {std::move(tag), [=](double x, double) { return std::abs(x - r.x1) <= tol; }};
    case 2: return {std::move(tag), [=](double, double z) { return std::abs(z - r.z1) <= tol; }};
    case 3: return {std::move(tag), [=](double x, double) { return std::abs(x - r.x0) <= tol; }};
    default: throw std::invalid_argument("region_side: side must be 0..3");
  }
}

/// Vertices lying on the boundary for which the region predicate holds,
/// sorted ascending, each listed once.
inline std::vector<int> tag_boundary(const Mesh& mesh, const BoundaryRegion& region) {
  std::vector<int> out;
  for (const BoundaryEdge& e : mesh.boundary_edges()) {
    for (int v : {e.v0, e.v1}) {
      const Vec2 p = mesh.vertex(v);
      if (region.contains(p.x, p.z)) out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace richards
