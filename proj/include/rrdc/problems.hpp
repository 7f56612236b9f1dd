#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rrdc/assembly.hpp"
#include "rrdc/mesh.hpp"

namespace rrdc {

using GradientFunction = std::function<Point2(const Point2&, double)>;

/// Closed-form space-time field with its first derivatives and Laplacian.
struct ExactField {
  SpaceTimeFunction value;
  GradientFunction gradient;
  SpaceTimeFunction time_derivative;
  SpaceTimeFunction laplacian;
};

/// Manufactured parabolic-parabolic interface problem: fluid field u below the
/// interface, solid field w above it.
struct ProblemSpec {
  std::string label;
  InterfaceSpec interface;
  BoundaryKind bc = BoundaryKind::NeumannSides;
  double nu_f = 1.0;
  double nu_s = 1.0;
  double alpha = 4.0;
  double final_time = 0.25;
  ExactField u;
  ExactField w;
  // Volume sources; empty means zero.
  SpaceTimeFunction g1;
  SpaceTimeFunction g2;

  /// l = nu_f grad(u) . n_f on the interface.
  double flux(const Point2& x, double t) const;
  /// b * nu * grad(u) . s, the quantity the multiplier of the modified
  /// (tangentially split) schemes approximates.
  double side_flux(const Point2& x, double t) const;
};

/// cos(pi x) sin(pi y) e^{-2 pi^2 t}, slanted interface (0,0.25)-(1,0.75),
/// Neumann vertical sides.
ProblemSpec example_neumann();
/// Two diffusivities (nu_f = 2, nu_s = 1), interface y = 0.75, with sources.
ProblemSpec example_viscosity();
/// sin(pi x) sin(pi y) e^{-2 pi^2 t}, slanted interface, Dirichlet on all sides.
ProblemSpec example_dirichlet();
/// Identically zero solution on the slanted Neumann geometry.
ProblemSpec example_zero();

/// Labels: neumann-slanted, two-viscosity, dirichlet-slanted, zero.
ProblemSpec problem_by_label(const std::string& label);
std::vector<std::string> problem_labels();

/// Separable field A e^{-decay t} X(x) Y(y). Each factor is given with its first
/// and second derivative.
struct Factor1d {
  std::function<double(double)> f, df, d2f;
};
ExactField separable_field(double amplitude, double decay, Factor1d x_factor, Factor1d y_factor);

}  // namespace rrdc
