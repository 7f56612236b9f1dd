#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace rrdc {

using Index = Eigen::Index;
using Point2 = Eigen::Vector2d;

enum class Subdomain : std::uint8_t { Fluid, Solid };

/// Boundary condition layout on the outer sides of the unit square.
///
/// NeumannSides: bottom is Dirichlet for the fluid, top is Dirichlet for the
/// solid, the vertical sides are homogeneous Neumann. DirichletSides: every
/// outer side is homogeneous Dirichlet. AllNeumann closes every outer side with
/// homogeneous Neumann data and is only used for conservation checks.
enum class BoundaryKind : std::uint8_t { NeumannSides, DirichletSides, AllNeumann };

/// Straight interface crossing the unit square from the left side to the right
/// side. The fluid occupies the region below it.
struct InterfaceSpec {
  double left = 0.5;   // y-intercept at x = 0
  double right = 0.5;  // y-intercept at x = 1
  bool horizontal = true;

  static InterfaceSpec Horizontal(double c) { return {c, c, true}; }
  static InterfaceSpec Slanted(double y0, double y1) { return {y0, y1, false}; }

  double y_at(double x) const { return left + (right - left) * x; }
  double length() const;
};

enum VertexTag : std::uint8_t {
  kInteriorF = 1u << 0,
  kInteriorS = 1u << 1,
  kDirichletF = 1u << 2,
  kDirichletS = 1u << 3,
  kNeumannF = 1u << 4,
  kNeumannS = 1u << 5,
  kInterface = 1u << 6,
};
using TagSet = std::uint8_t;

inline bool has_tag(TagSet set, VertexTag tag) { return (set & tag) != 0; }

struct Mesh {
  std::vector<Point2> vertices;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<Subdomain> subdomain_of_triangle;
  std::vector<TagSet> vertex_tags;
  // Ordered by increasing x.
  std::vector<Index> interface_vertices;
  std::vector<std::array<Index, 2>> interface_edges;
  double h = 0.0;

  Index num_vertices() const { return static_cast<Index>(vertices.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles.size()); }
};

/// Structured triangulation of (0,1)^2 whose grid row `interface_row(n, spec)`
/// is bent onto the interface. Columns are stretched vertically and uniformly
/// on each side of the interface; quads are cut along the bottom-left to
/// top-right diagonal.
Mesh build_mesh(int n, const InterfaceSpec& spec, BoundaryKind bc);

int interface_row(int n, const InterfaceSpec& spec);

/// Unit tangent (increasing x), fluid outward normal, and the coefficients of
/// normal_f = a * tangent + b * side with side = (0, 1).
struct InterfaceFrame {
  Point2 tangent;
  Point2 normal_f;
  Point2 side;
  double a = 0.0;
  double b = 1.0;
};

InterfaceFrame interface_tangent_normal(const InterfaceSpec& spec);

double triangle_area(const Point2& p0, const Point2& p1, const Point2& p2);

/// Plain-text dump: `vertex x y` and `tri i j k sub` lines.
void write_mesh(std::ostream& os, const Mesh& mesh);

}  // namespace rrdc
