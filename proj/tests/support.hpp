#pragma once

// Dense reference implementations used as test oracles. They share nothing with
// the library except the mesh and the unknown numbering.

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "rrdc/assembly.hpp"
#include "rrdc/mesh.hpp"
#include "rrdc/schemes.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using rrdc::Index;

struct Dense {
  MatrixXd mass, stiffness;  // over subdomain unknowns, unit diffusivity
};

// Element matrices from the classical b_i, c_i coefficients.
inline Dense dense_volume(const rrdc::Mesh& mesh, const rrdc::DofMap& dofs) {
  const Index n = dofs.size();
  Dense out{MatrixXd::Zero(n, n), MatrixXd::Zero(n, n)};
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.subdomain_of_triangle[t] != dofs.subdomain) continue;
    const auto& tri = mesh.triangles[t];
    double x[3], y[3];
    for (int i = 0; i < 3; ++i) {
      x[i] = mesh.vertices[tri[i]].x();
      y[i] = mesh.vertices[tri[i]].y();
    }
    const double det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
    const double area = 0.5 * std::abs(det);
    double b[3], c[3];
    for (int i = 0; i < 3; ++i) {
      b[i] = y[(i + 1) % 3] - y[(i + 2) % 3];
      c[i] = x[(i + 2) % 3] - x[(i + 1) % 3];
    }
    for (int i = 0; i < 3; ++i) {
      const Index r = dofs.dof_of_vertex[tri[i]];
      if (r < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const Index s = dofs.dof_of_vertex[tri[j]];
        if (s < 0) continue;
        out.mass(r, s) += area / 12.0 * (i == j ? 2.0 : 1.0);
        out.stiffness(r, s) += (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
      }
    }
  }
  return out;
}

struct DenseInterface {
  MatrixXd mass;        // <phi_j, phi_i>
  MatrixXd tangential;  // <d phi_j / d s, phi_i>
};

inline DenseInterface dense_interface(const rrdc::Mesh& mesh) {
  const Index m = static_cast<Index>(mesh.interface_vertices.size());
  DenseInterface out{MatrixXd::Zero(m, m), MatrixXd::Zero(m, m)};
  for (Index e = 0; e + 1 < m; ++e) {
    const auto& p = mesh.vertices[mesh.interface_vertices[e]];
    const auto& q = mesh.vertices[mesh.interface_vertices[e + 1]];
    const double len = (q - p).norm();
    out.mass(e, e) += len / 3.0;
    out.mass(e + 1, e + 1) += len / 3.0;
    out.mass(e, e + 1) += len / 6.0;
    out.mass(e + 1, e) += len / 6.0;
    // Slopes -1/len and +1/len times the integral len/2 of each hat on the edge.
    for (Index i : {e, e + 1}) {
      out.tangential(i, e) -= 0.5;
      out.tangential(i, e + 1) += 0.5;
    }
  }
  return out;
}

inline MatrixXd dense_trace(const rrdc::Mesh& mesh, const rrdc::DofMap& dofs) {
  const Index m = static_cast<Index>(mesh.interface_vertices.size());
  MatrixXd r = MatrixXd::Zero(m, dofs.size());
  for (Index i = 0; i < m; ++i) {
    const Index d = dofs.dof_of_vertex[mesh.interface_vertices[i]];
    if (d >= 0) r(i, d) = 1.0;
  }
  return r;
}

struct System {
  Dense solid, fluid;
  DenseInterface iface;
  MatrixXd rs, rf;
};

inline System dense_system(const rrdc::Discretization& d) {
  return {dense_volume(d.mesh, d.solid), dense_volume(d.mesh, d.fluid), dense_interface(d.mesh),
          dense_trace(d.mesh, d.solid), dense_trace(d.mesh, d.fluid)};
}

struct Params {
  double dt, alpha, nu_f, nu_s, a = 0.0, b = 1.0;
};

// Assembles one step of the coupled discrete equations as a single block system
// in (w', u', lambda') and solves it by dense LU. `pred`/`pred_next` null gives
// the prediction step; otherwise the defect-correction right-hand sides.
inline rrdc::CoupledState block_step(const System& s, const Params& p, const rrdc::CoupledState& state,
                                     const rrdc::Loads& loads, const rrdc::CoupledState* pred = nullptr,
                                     const rrdc::CoupledState* pred_next = nullptr) {
  const Index ns = s.rs.cols(), nf = s.rf.cols(), nl = s.rs.rows();
  const MatrixXd& M = s.iface.mass;
  const MatrixXd& T = s.iface.tangential;
  MatrixXd A = MatrixXd::Zero(ns + nf + nl, ns + nf + nl);
  VectorXd rhs = VectorXd::Zero(ns + nf + nl);

  A.block(0, 0, ns, ns) = s.solid.mass / p.dt + p.nu_s * s.solid.stiffness + p.b * p.alpha * s.rs.transpose() * M * s.rs +
                          p.a * p.nu_s * s.rs.transpose() * T * s.rs;
  rhs.head(ns) = s.solid.mass * state.w / p.dt + p.b * p.alpha * s.rs.transpose() * M * (s.rf * state.u) -
                 s.rs.transpose() * M * state.lambda + loads.solid;

  A.block(ns, ns, nf, nf) = s.fluid.mass / p.dt + p.nu_f * s.fluid.stiffness - p.a * p.nu_f * s.rf.transpose() * T * s.rf;
  A.block(ns, ns + nf, nf, nl) = -s.rf.transpose() * M;
  rhs.segment(ns, nf) = s.fluid.mass * state.u / p.dt + loads.fluid;

  A.block(ns + nf, 0, nl, ns) = -p.alpha * M * s.rs;
  A.block(ns + nf, ns, nl, nf) = p.alpha * M * s.rf;
  A.block(ns + nf, ns + nf, nl, nl) = M;
  rhs.tail(nl) = M * state.lambda;

  if (pred) {
    const VectorXd w_half = 0.5 * (pred->w + pred_next->w), u_half = 0.5 * (pred->u + pred_next->u);
    const VectorXd l_half = 0.5 * (pred->lambda + pred_next->lambda);
    rhs.head(ns) += p.nu_s * s.solid.stiffness * (pred_next->w - w_half) +
                    p.b * p.alpha * s.rs.transpose() * M * s.rs * (pred_next->w - pred->w) +
                    s.rs.transpose() * M * (pred->lambda - l_half) +
                    p.a * p.nu_s * s.rs.transpose() * T * s.rs * (pred_next->w - w_half);
    rhs.segment(ns, nf) += p.nu_f * s.fluid.stiffness * (pred_next->u - u_half) -
                           s.rf.transpose() * M * (pred_next->lambda - l_half) -
                           p.a * p.nu_f * s.rf.transpose() * T * s.rf * (pred_next->u - u_half);
    rhs.tail(nl) += M * (pred_next->lambda - pred->lambda);
  }

  const VectorXd x = A.fullPivLu().solve(rhs);
  rrdc::CoupledState out;
  out.t = state.t + p.dt;
  out.w = x.head(ns);
  out.u = x.segment(ns, nf);
  out.lambda = x.tail(nl);
  return out;
}

// Implicit Euler for the coupled problem with continuity enforced at the shared
// interface unknowns.
inline rrdc::CoupledState monolithic_step(const System& s, const Params& p, const rrdc::CoupledState& state,
                                          const rrdc::Loads& loads) {
  const Index ns = s.rs.cols(), nf = s.rf.cols(), nl = s.rs.rows();
  std::vector<Index> nodes;
  for (Index i = 0; i < nl; ++i) {
    if (s.rs.row(i).sum() > 0.0 && s.rf.row(i).sum() > 0.0) nodes.push_back(i);
  }
  const Index nm = static_cast<Index>(nodes.size());
  MatrixXd E = MatrixXd::Zero(nm, nl);
  for (Index k = 0; k < nm; ++k) E(k, nodes[k]) = 1.0;
  const MatrixXd cs = E * s.iface.mass * s.rs, cf = E * s.iface.mass * s.rf;
  MatrixXd A = MatrixXd::Zero(ns + nf + nm, ns + nf + nm);
  A.block(0, 0, ns, ns) = s.solid.mass / p.dt + p.nu_s * s.solid.stiffness;
  A.block(ns, ns, nf, nf) = s.fluid.mass / p.dt + p.nu_f * s.fluid.stiffness;
  A.block(0, ns + nf, ns, nm) = cs.transpose();
  A.block(ns, ns + nf, nf, nm) = -cf.transpose();
  A.block(ns + nf, 0, nm, ns) = cs;
  A.block(ns + nf, ns, nm, nf) = -cf;
  VectorXd rhs = VectorXd::Zero(ns + nf + nm);
  rhs.head(ns) = s.solid.mass * state.w / p.dt + loads.solid;
  rhs.segment(ns, nf) = s.fluid.mass * state.u / p.dt + loads.fluid;
  const VectorXd x = A.fullPivLu().solve(rhs);
  rrdc::CoupledState out;
  out.t = state.t + p.dt;
  out.w = x.head(ns);
  out.u = x.segment(ns, nf);
  out.lambda = VectorXd::Zero(nl);
  for (Index k = 0; k < nm; ++k) out.lambda[nodes[k]] = x[ns + nf + k];
  return out;
}

inline double rel_diff(const rrdc::CoupledState& a, const rrdc::CoupledState& b) {
  VectorXd va(a.w.size() + a.u.size() + a.lambda.size()), vb(va.size());
  va << a.w, a.u, a.lambda;
  vb << b.w, b.u, b.lambda;
  return (va - vb).norm() / std::max(vb.norm(), 1e-300);
}

inline rrdc::CoupledState random_state(const rrdc::Discretization& d, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const auto fill = [&](Index n) {
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
  };
  rrdc::CoupledState s;
  s.w = fill(d.solid.size());
  s.u = fill(d.fluid.size());
  s.lambda = fill(d.solid.interface_size());
  return s;
}

inline rrdc::Loads random_loads(const rrdc::Discretization& d, std::mt19937& rng) {
  const rrdc::CoupledState s = random_state(d, rng);
  return {s.w, s.u};
}

}  // namespace oracle
