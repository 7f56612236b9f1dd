#include "rrdc/assembly.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace rrdc {

namespace {

using Triplet = Eigen::Triplet<double>;

bool dirichlet_for(TagSet tags, Subdomain sub) {
  return has_tag(tags, sub == Subdomain::Fluid ? kDirichletF : kDirichletS);
}

template <typename ElementKernel>
SparseMatrix assemble_volume(const Mesh& mesh, const DofMap& dofs, ElementKernel&& kernel) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 9 / 2);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.subdomain_of_triangle[t] != dofs.subdomain) continue;
    const auto& tri = mesh.triangles[t];
    const Eigen::Matrix3d local = kernel(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    for (int a = 0; a < 3; ++a) {
      const Index ra = dofs.dof_of_vertex[tri[a]];
      if (ra < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const Index cb = dofs.dof_of_vertex[tri[b]];
        if (cb < 0) continue;
        triplets.emplace_back(ra, cb, local(a, b));
      }
    }
  }
  SparseMatrix out(dofs.size(), dofs.size());
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

// Bitwise symmetric copy.
SparseMatrix symmetrized(const SparseMatrix& a) {
  SparseMatrix at = a.transpose();
  SparseMatrix out = 0.5 * (a + at);
  out.makeCompressed();
  return out;
}

}  // namespace

DofMap make_dofmap(const Mesh& mesh, Subdomain subdomain) {
  DofMap dofs;
  dofs.subdomain = subdomain;
  std::vector<char> touched(mesh.vertices.size(), 0);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.subdomain_of_triangle[t] != subdomain) continue;
    for (Index v : mesh.triangles[t]) touched[v] = 1;
  }
  dofs.dof_of_vertex.assign(mesh.vertices.size(), -1);
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    if (!touched[v] || dirichlet_for(mesh.vertex_tags[v], subdomain)) continue;
    dofs.dof_of_vertex[v] = dofs.size();
    dofs.vertex_of_dof.push_back(v);
  }
  dofs.interface_dofs.reserve(mesh.interface_vertices.size());
  for (Index v : mesh.interface_vertices) dofs.interface_dofs.push_back(dofs.dof_of_vertex[v]);
  return dofs;
}

SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs) {
  return symmetrized(assemble_volume(mesh, dofs, [](const Point2& a, const Point2& b, const Point2& c) {
    return p1_mass_element<double>(a, b, c);
  }));
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("assemble_stiffness: diffusivity must be positive");
  return symmetrized(assemble_volume(mesh, dofs, [nu](const Point2& a, const Point2& b, const Point2& c) {
    return Eigen::Matrix3d(nu * p1_stiffness_element<double>(a, b, c));
  }));
}

InterfaceOperator assemble_interface(const Mesh& mesh, const InterfaceSpec& spec) {
  const Index n = static_cast<Index>(mesh.interface_vertices.size());
  if (n < 2) throw std::invalid_argument("assemble_interface: mesh has no interface");
  for (Index v : mesh.interface_vertices) {
    const Point2& p = mesh.vertices[v];
    if (std::abs(p.y() - spec.y_at(p.x())) > 1e-12) {
      throw std::invalid_argument("assemble_interface: mesh interface does not lie on the given line");
    }
  }

  std::vector<Triplet> mass, tang;
  InterfaceOperator ops;
  for (Index e = 0; e + 1 < n; ++e) {
    const Point2& pa = mesh.vertices[mesh.interface_vertices[e]];
    const Point2& pb = mesh.vertices[mesh.interface_vertices[e + 1]];
    const double len = (pb - pa).norm();
    ops.length += len;
    mass.emplace_back(e, e, len / 3.0);
    mass.emplace_back(e, e + 1, len / 6.0);
    mass.emplace_back(e + 1, e, len / 6.0);
    mass.emplace_back(e + 1, e + 1, len / 3.0);
    // Constant arc-length derivative (v_b - v_a)/len integrated against each hat.
    tang.emplace_back(e, e, -0.5);
    tang.emplace_back(e, e + 1, 0.5);
    tang.emplace_back(e + 1, e, -0.5);
    tang.emplace_back(e + 1, e + 1, 0.5);
  }
  ops.mass.resize(n, n);
  ops.mass.setFromTriplets(mass.begin(), mass.end());
  ops.mass.makeCompressed();
  ops.tangential.resize(n, n);
  ops.tangential.setFromTriplets(tang.begin(), tang.end());
  ops.tangential.makeCompressed();
  return ops;
}

Vector assemble_load(const Mesh& mesh, const DofMap& dofs, const SpaceTimeFunction& f, double t) {
  Vector load = Vector::Zero(dofs.size());
  if (!f) return load;
  for (Index k = 0; k < mesh.num_triangles(); ++k) {
    if (mesh.subdomain_of_triangle[k] != dofs.subdomain) continue;
    const auto& tri = mesh.triangles[k];
    const Point2& p0 = mesh.vertices[tri[0]];
    const Point2& p1 = mesh.vertices[tri[1]];
    const Point2& p2 = mesh.vertices[tri[2]];
    const double w = std::abs(triangle_area(p0, p1, p2)) / 3.0;
    // Midpoint q_ab sees hats a and b with value 1/2 each.
    const double f01 = f(0.5 * (p0 + p1), t);
    const double f12 = f(0.5 * (p1 + p2), t);
    const double f20 = f(0.5 * (p2 + p0), t);
    const std::array<double, 3> contrib{0.5 * w * (f01 + f20), 0.5 * w * (f01 + f12), 0.5 * w * (f12 + f20)};
    for (int a = 0; a < 3; ++a) {
      const Index r = dofs.dof_of_vertex[tri[a]];
      if (r >= 0) load[r] += contrib[a];
    }
  }
  return load;
}

SparseMatrix trace_matrix(const DofMap& dofs) {
  std::vector<Triplet> triplets;
  for (Index i = 0; i < dofs.interface_size(); ++i) {
    if (dofs.interface_dofs[i] >= 0) triplets.emplace_back(i, dofs.interface_dofs[i], 1.0);
  }
  SparseMatrix r(dofs.interface_size(), dofs.size());
  r.setFromTriplets(triplets.begin(), triplets.end());
  r.makeCompressed();
  return r;
}

Vector lift_trace(const DofMap& dofs, const Vector& interface_values) {
  if (interface_values.size() != dofs.interface_size()) {
    throw std::invalid_argument("lift_trace: interface vector has the wrong size");
  }
  Vector out = Vector::Zero(dofs.size());
  for (Index i = 0; i < dofs.interface_size(); ++i) {
    if (dofs.interface_dofs[i] >= 0) out[dofs.interface_dofs[i]] = interface_values[i];
  }
  return out;
}

Vector restrict_trace(const DofMap& dofs, const Vector& field) {
  if (field.size() != dofs.size()) throw std::invalid_argument("restrict_trace: field has the wrong size");
  Vector out = Vector::Zero(dofs.interface_size());
  for (Index i = 0; i < dofs.interface_size(); ++i) {
    if (dofs.interface_dofs[i] >= 0) out[i] = field[dofs.interface_dofs[i]];
  }
  return out;
}

Vector interpolate(const Mesh& mesh, const DofMap& dofs, const SpaceTimeFunction& f, double t) {
  Vector out(dofs.size());
  for (Index d = 0; d < dofs.size(); ++d) out[d] = f(mesh.vertices[dofs.vertex_of_dof[d]], t);
  return out;
}

Vector interpolate_interface(const Mesh& mesh, const SpaceTimeFunction& g, double t) {
  Vector out(static_cast<Index>(mesh.interface_vertices.size()));
  for (Index i = 0; i < out.size(); ++i) out[i] = g(mesh.vertices[mesh.interface_vertices[i]], t);
  return out;
}

Vector project_interface(const Mesh& mesh, const InterfaceOperator& ops, const SpaceTimeFunction& g, double t) {
  const Index n = static_cast<Index>(mesh.interface_vertices.size());
  Vector rhs = Vector::Zero(n);
  // Gauss-Legendre on [0,1].
  const double r = std::sqrt(0.15);
  const std::array<double, 3> s{0.5 - r, 0.5, 0.5 + r};
  const std::array<double, 3> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  for (Index e = 0; e + 1 < n; ++e) {
    const Point2& pa = mesh.vertices[mesh.interface_vertices[e]];
    const Point2& pb = mesh.vertices[mesh.interface_vertices[e + 1]];
    const double len = (pb - pa).norm();
    for (int q = 0; q < 3; ++q) {
      const double val = g(pa + s[q] * (pb - pa), t) * w[q] * len;
      rhs[e] += val * (1.0 - s[q]);
      rhs[e + 1] += val * s[q];
    }
  }
  const CholeskyFactor factor(ops.mass);
  return factor.solve(rhs);
}

}  // namespace rrdc
