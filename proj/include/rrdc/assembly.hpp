#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "rrdc/mesh.hpp"
#include "rrdc/sparse.hpp"

namespace rrdc {

/// f(x, t): scalar field evaluated at a point and a time.
using SpaceTimeFunction = std::function<double(const Point2&, double)>;

// Element kernels ---------------------------------------------------------------

/// Exact P1 mass matrix of one triangle: area/12 * [[2,1,1],[1,2,1],[1,1,2]].
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> p1_mass_element(const Eigen::Matrix<Scalar, 2, 1>& p0,
                                            const Eigen::Matrix<Scalar, 2, 1>& p1,
                                            const Eigen::Matrix<Scalar, 2, 1>& p2) {
  const Scalar area = Scalar(0.5) * std::abs((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
  Eigen::Matrix<Scalar, 3, 3> m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return m * (area / Scalar(12));
}

/// Gradients of the three P1 hat functions (constant on the triangle), one per column.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 3> p1_gradients(const Eigen::Matrix<Scalar, 2, 1>& p0,
                                         const Eigen::Matrix<Scalar, 2, 1>& p1,
                                         const Eigen::Matrix<Scalar, 2, 1>& p2) {
  Eigen::Matrix<Scalar, 2, 2> jac;
  jac.col(0) = p1 - p0;
  jac.col(1) = p2 - p0;
  const Eigen::Matrix<Scalar, 2, 2> inv_t = jac.inverse().transpose();
  Eigen::Matrix<Scalar, 2, 3> ref;
  ref << -1, 1, 0, -1, 0, 1;
  return inv_t * ref;
}

/// Exact P1 stiffness matrix of one triangle for unit diffusivity.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> p1_stiffness_element(const Eigen::Matrix<Scalar, 2, 1>& p0,
                                                 const Eigen::Matrix<Scalar, 2, 1>& p1,
                                                 const Eigen::Matrix<Scalar, 2, 1>& p2) {
  const Scalar area = Scalar(0.5) * std::abs((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
  const Eigen::Matrix<Scalar, 2, 3> g = p1_gradients(p0, p1, p2);
  return area * (g.transpose() * g);
}

// Degrees of freedom --------------------------------------------------------------

/// Maps mesh vertices of one subdomain to solver unknowns. Vertices carrying the
/// subdomain's Dirichlet tag are eliminated.
struct DofMap {
  Subdomain subdomain = Subdomain::Fluid;
  std::vector<Index> dof_of_vertex;  // -1 when the vertex is not an unknown
  std::vector<Index> vertex_of_dof;
  // One entry per interface vertex (same order as Mesh::interface_vertices);
  // -1 where the interface vertex is Dirichlet-constrained.
  std::vector<Index> interface_dofs;

  Index size() const { return static_cast<Index>(vertex_of_dof.size()); }
  Index interface_size() const { return static_cast<Index>(interface_dofs.size()); }
};

DofMap make_dofmap(const Mesh& mesh, Subdomain subdomain);

/// Interface operators over the P1 trace space (all interface vertices).
struct InterfaceOperator {
  SparseMatrix mass;        // <phi, psi> on the interface
  SparseMatrix tangential;  // (T v)_i = <d v / d tau, psi_i>
  double length = 0.0;
};

SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs);
SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, double nu);
InterfaceOperator assemble_interface(const Mesh& mesh, const InterfaceSpec& spec);

/// Load vector with the three-edge-midpoint rule (exact for quadratics).
Vector assemble_load(const Mesh& mesh, const DofMap& dofs, const SpaceTimeFunction& f, double t);

/// Sparse restriction R with (R v) = interface trace of v; R is interface_size x size.
SparseMatrix trace_matrix(const DofMap& dofs);

Vector lift_trace(const DofMap& dofs, const Vector& interface_values);
Vector restrict_trace(const DofMap& dofs, const Vector& field);

/// Nodal interpolant on the subdomain unknowns.
Vector interpolate(const Mesh& mesh, const DofMap& dofs, const SpaceTimeFunction& f, double t);
/// Nodal values at the interface vertices.
Vector interpolate_interface(const Mesh& mesh, const SpaceTimeFunction& g, double t);
/// L2(interface) projection onto the P1 trace space (3-point Gauss per edge).
Vector project_interface(const Mesh& mesh, const InterfaceOperator& ops, const SpaceTimeFunction& g, double t);

}  // namespace rrdc
