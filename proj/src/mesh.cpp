#include "rrdc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace rrdc {

double InterfaceSpec::length() const {
  const double dy = right - left;
  return std::sqrt(1.0 + dy * dy);
}

double triangle_area(const Point2& p0, const Point2& p1, const Point2& p2) {
  const Point2 e1 = p1 - p0;
  const Point2 e2 = p2 - p0;
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

int interface_row(int n, const InterfaceSpec& spec) {
  const double mean = 0.5 * (spec.left + spec.right);
  const int row = static_cast<int>(std::ceil(n * mean - 1e-12));
  return std::clamp(row, 1, n - 1);
}

namespace {

void validate(int n, const InterfaceSpec& spec) {
  if (n < 2) {
    throw std::invalid_argument("build_mesh: need at least 2 subdivisions per side");
  }
  const auto inside = [](double y) { return y > 0.0 && y < 1.0; };
  if (!inside(spec.left) || !inside(spec.right)) {
    throw std::invalid_argument("build_mesh: interface must cross the square strictly between bottom and top");
  }
  if (spec.horizontal && spec.left != spec.right) {
    throw std::invalid_argument("build_mesh: horizontal interface with unequal intercepts");
  }
}

TagSet side_tags(BoundaryKind bc, int j, int m) {
  switch (bc) {
    case BoundaryKind::NeumannSides:
      if (j < m) return kNeumannF;
      if (j > m) return kNeumannS;
      return kInterface | kNeumannF | kNeumannS;
    case BoundaryKind::DirichletSides:
      if (j < m) return kDirichletF;
      if (j > m) return kDirichletS;
      return kInterface | kDirichletF | kDirichletS;
    case BoundaryKind::AllNeumann:
      if (j < m) return kNeumannF;
      if (j > m) return kNeumannS;
      return kInterface | kNeumannF | kNeumannS;
  }
  return 0;
}

}  // namespace

Mesh build_mesh(int n, const InterfaceSpec& spec, BoundaryKind bc) {
  validate(n, spec);
  const int m = interface_row(n, spec);
  if (m < 1 || m > n - 1) {
    throw std::invalid_argument("build_mesh: interface row leaves an empty layer");
  }

  Mesh mesh;
  mesh.h = 1.0 / n;
  const int stride = n + 1;
  mesh.vertices.resize(static_cast<std::size_t>(stride) * stride);
  mesh.vertex_tags.assign(mesh.vertices.size(), 0);

  const auto vid = [stride](int i, int j) { return static_cast<Index>(j) * stride + i; };

  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    const double ys = spec.y_at(x);
    for (int j = 0; j <= n; ++j) {
      double y;
      if (j < m) {
        y = ys * static_cast<double>(j) / m;
      } else if (j == m) {
        y = ys;
      } else {
        y = ys + (1.0 - ys) * static_cast<double>(j - m) / (n - m);
      }
      mesh.vertices[vid(i, j)] = Point2(x, y);

      TagSet tags = 0;
      const bool vertical_side = (i == 0 || i == n);
      if (j == 0) {
        tags = bc == BoundaryKind::AllNeumann ? kNeumannF : kDirichletF;
      } else if (j == n) {
        tags = bc == BoundaryKind::AllNeumann ? kNeumannS : kDirichletS;
      } else if (vertical_side) {
        tags = side_tags(bc, j, m);
      } else if (j < m) {
        tags = kInteriorF;
      } else if (j > m) {
        tags = kInteriorS;
      } else {
        tags = kInterface;
      }
      mesh.vertex_tags[vid(i, j)] = tags;
    }
  }

  mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  mesh.subdomain_of_triangle.reserve(mesh.triangles.capacity());
  for (int j = 0; j < n; ++j) {
    const Subdomain sub = j < m ? Subdomain::Fluid : Subdomain::Solid;
    for (int i = 0; i < n; ++i) {
      const Index v00 = vid(i, j), v10 = vid(i + 1, j);
      const Index v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
      mesh.subdomain_of_triangle.push_back(sub);
      mesh.subdomain_of_triangle.push_back(sub);
    }
  }

  mesh.interface_vertices.reserve(stride);
  for (int i = 0; i <= n; ++i) mesh.interface_vertices.push_back(vid(i, m));
  for (int i = 0; i < n; ++i) {
    mesh.interface_edges.push_back({mesh.interface_vertices[i], mesh.interface_vertices[i + 1]});
  }
  return mesh;
}

InterfaceFrame interface_tangent_normal(const InterfaceSpec& spec) {
  InterfaceFrame frame;
  frame.tangent = Point2(1.0, spec.right - spec.left).normalized();
  frame.normal_f = Point2(-frame.tangent.y(), frame.tangent.x());
  frame.side = Point2(0.0, 1.0);
  // normal_f = a*tangent + b*side, solved componentwise (tangent.x() > 0).
  frame.a = frame.normal_f.x() / frame.tangent.x();
  frame.b = frame.normal_f.y() - frame.a * frame.tangent.y();
  return frame;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto flags = os.flags();
  os << std::setprecision(17);
  for (const auto& v : mesh.vertices) os << "vertex " << v.x() << ' ' << v.y() << '\n';
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    os << "tri " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' '
       << (mesh.subdomain_of_triangle[t] == Subdomain::Fluid ? "fluid" : "solid") << '\n';
  }
  os.flags(flags);
}

}  // namespace rrdc
