#include "rrdc/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rrdc {

namespace {

constexpr double kPi = std::numbers::pi;

Factor1d cosine(double k) {
  return {[k](double s) { return std::cos(k * s); }, [k](double s) { return -k * std::sin(k * s); },
          [k](double s) { return -k * k * std::cos(k * s); }};
}

Factor1d sine(double k, double shift = 0.0) {
  return {[k, shift](double s) { return std::sin(k * (s - shift)); },
          [k, shift](double s) { return k * std::cos(k * (s - shift)); },
          [k, shift](double s) { return -k * k * std::sin(k * (s - shift)); }};
}

// g = d_t f - nu * lap f
SpaceTimeFunction heat_residual(const ExactField& field, double nu) {
  return [dt = field.time_derivative, lap = field.laplacian, nu](const Point2& x, double t) {
    return dt(x, t) - nu * lap(x, t);
  };
}

}  // namespace

ExactField separable_field(double amplitude, double decay, Factor1d xf, Factor1d yf) {
  ExactField field;
  field.value = [=](const Point2& p, double t) { return amplitude * std::exp(-decay * t) * xf.f(p.x()) * yf.f(p.y()); };
  field.gradient = [=](const Point2& p, double t) {
    const double e = amplitude * std::exp(-decay * t);
    return Point2(e * xf.df(p.x()) * yf.f(p.y()), e * xf.f(p.x()) * yf.df(p.y()));
  };
  field.time_derivative = [=](const Point2& p, double t) {
    return -decay * amplitude * std::exp(-decay * t) * xf.f(p.x()) * yf.f(p.y());
  };
  field.laplacian = [=](const Point2& p, double t) {
    const double e = amplitude * std::exp(-decay * t);
    return e * (xf.d2f(p.x()) * yf.f(p.y()) + xf.f(p.x()) * yf.d2f(p.y()));
  };
  return field;
}

double ProblemSpec::flux(const Point2& x, double t) const {
  const InterfaceFrame frame = interface_tangent_normal(interface);
  return nu_f * u.gradient(x, t).dot(frame.normal_f);
}

double ProblemSpec::side_flux(const Point2& x, double t) const {
  const InterfaceFrame frame = interface_tangent_normal(interface);
  return frame.b * nu_f * u.gradient(x, t).dot(frame.side);
}

ProblemSpec example_neumann() {
  ProblemSpec p;
  p.label = "neumann-slanted";
  p.interface = InterfaceSpec::Slanted(0.25, 0.75);
  p.bc = BoundaryKind::NeumannSides;
  p.nu_f = p.nu_s = 1.0;
  p.alpha = 4.0;
  p.final_time = 0.25;
  p.u = separable_field(1.0, 2.0 * kPi * kPi, cosine(kPi), sine(kPi));
  p.w = p.u;
  return p;
}

ProblemSpec example_viscosity() {
  ProblemSpec p;
  p.label = "two-viscosity";
  p.interface = InterfaceSpec::Horizontal(0.75);
  p.bc = BoundaryKind::NeumannSides;
  p.nu_f = 2.0;
  p.nu_s = 1.0;
  p.alpha = 4.0;
  p.final_time = 0.25;
  const double ratio = p.nu_f / p.nu_s;
  p.u = separable_field(1.0, 2.0 * kPi * kPi, cosine(kPi), sine(4.0 * kPi, 0.75));
  p.w = separable_field(1.0, 2.0 * kPi * kPi, cosine(kPi), sine(4.0 * kPi * ratio, 0.75));
  p.g1 = heat_residual(p.u, p.nu_f);
  p.g2 = heat_residual(p.w, p.nu_s);
  return p;
}

ProblemSpec example_dirichlet() {
  ProblemSpec p;
  p.label = "dirichlet-slanted";
  p.interface = InterfaceSpec::Slanted(0.25, 0.75);
  p.bc = BoundaryKind::DirichletSides;
  p.nu_f = p.nu_s = 1.0;
  p.alpha = 4.0;
  p.final_time = 0.25;
  p.u = separable_field(1.0, 2.0 * kPi * kPi, sine(kPi), sine(kPi));
  p.w = p.u;
  return p;
}

ProblemSpec example_zero() {
  ProblemSpec p = example_neumann();
  p.label = "zero";
  p.u = separable_field(0.0, 0.0, cosine(kPi), sine(kPi));
  p.w = p.u;
  return p;
}

std::vector<std::string> problem_labels() { return {"neumann-slanted", "two-viscosity", "dirichlet-slanted", "zero"}; }

ProblemSpec problem_by_label(const std::string& label) {
  if (label == "neumann-slanted") return example_neumann();
  if (label == "two-viscosity") return example_viscosity();
  if (label == "dirichlet-slanted") return example_dirichlet();
  if (label == "zero") return example_zero();
  throw std::invalid_argument("unknown problem label '" + label + "'");
}

}  // namespace rrdc
