#include "rrdc/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace rrdc {

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Prediction: return "prediction";
    case Scheme::Correction: return "correction";
    case Scheme::ModifiedPrediction: return "modified-prediction";
    case Scheme::ModifiedCorrection: return "modified-correction";
    case Scheme::Monolithic: return "monolithic";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  for (Scheme s : {Scheme::Prediction, Scheme::Correction, Scheme::ModifiedPrediction, Scheme::ModifiedCorrection,
                   Scheme::Monolithic}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

bool is_modified(Scheme scheme) { return scheme == Scheme::ModifiedPrediction || scheme == Scheme::ModifiedCorrection; }

bool has_correction(Scheme scheme) { return scheme == Scheme::Correction || scheme == Scheme::ModifiedCorrection; }

// Discretization ----------------------------------------------------------------------

std::shared_ptr<const Discretization> make_discretization(int n, const InterfaceSpec& spec, BoundaryKind bc) {
  auto disc = std::make_shared<Discretization>();
  disc->mesh = build_mesh(n, spec, bc);
  disc->interface = spec;
  disc->bc = bc;
  disc->solid = make_dofmap(disc->mesh, Subdomain::Solid);
  disc->fluid = make_dofmap(disc->mesh, Subdomain::Fluid);
  disc->mass_s = assemble_mass(disc->mesh, disc->solid);
  disc->mass_f = assemble_mass(disc->mesh, disc->fluid);
  disc->stiffness_s = assemble_stiffness(disc->mesh, disc->solid, 1.0);
  disc->stiffness_f = assemble_stiffness(disc->mesh, disc->fluid, 1.0);
  disc->iface = assemble_interface(disc->mesh, spec);
  disc->trace_s = trace_matrix(disc->solid);
  disc->trace_f = trace_matrix(disc->fluid);
  return disc;
}

Loads assemble_loads(const Discretization& disc, const ProblemSpec& problem, double t) {
  return {assemble_load(disc.mesh, disc.solid, problem.g2, t), assemble_load(disc.mesh, disc.fluid, problem.g1, t)};
}

Loads average(const Loads& a, const Loads& b) { return {0.5 * (a.solid + b.solid), 0.5 * (a.fluid + b.fluid)}; }

// Step operators ----------------------------------------------------------------------

namespace {

SparseMatrix pulled_back(const SparseMatrix& trace, const SparseMatrix& iface) {
  SparseMatrix out = trace.transpose() * iface * trace;
  out.makeCompressed();
  return out;
}

SparseMatrix solid_operator(const Discretization& d, const StepParameters& p) {
  SparseMatrix a = d.mass_s / p.dt + p.nu_s * d.stiffness_s + (p.b * p.alpha) * pulled_back(d.trace_s, d.iface.mass);
  if (p.a != 0.0) a += (p.a * p.nu_s) * pulled_back(d.trace_s, d.iface.tangential);
  a.makeCompressed();
  return a;
}

SparseMatrix fluid_operator(const Discretization& d, const StepParameters& p) {
  SparseMatrix a = d.mass_f / p.dt + p.nu_f * d.stiffness_f + p.alpha * pulled_back(d.trace_f, d.iface.mass);
  if (p.a != 0.0) a -= (p.a * p.nu_f) * pulled_back(d.trace_f, d.iface.tangential);
  a.makeCompressed();
  return a;
}

void check_state(const Discretization& d, const CoupledState& s, const char* what) {
  if (s.w.size() != d.solid.size() || s.u.size() != d.fluid.size() || s.lambda.size() != d.solid.interface_size()) {
    throw std::invalid_argument(std::string(what) + ": state does not match the discretization");
  }
}

}  // namespace

StepOperators::StepOperators(std::shared_ptr<const Discretization> disc, const StepParameters& params)
    : disc_(std::move(disc)),
      params_(params),
      lift_s_(SparseMatrix(disc_->trace_s.transpose()) * disc_->iface.mass),
      lift_f_(SparseMatrix(disc_->trace_f.transpose()) * disc_->iface.mass),
      tangential_s_(params.a != 0.0 ? pulled_back(disc_->trace_s, disc_->iface.tangential) : SparseMatrix()),
      tangential_f_(params.a != 0.0 ? pulled_back(disc_->trace_f, disc_->iface.tangential) : SparseMatrix()),
      solid_matrix_(solid_operator(*disc_, params_)),
      fluid_matrix_(fluid_operator(*disc_, params_)),
      solid_solver_(solid_matrix_),
      fluid_solver_(fluid_matrix_) {
  if (!(params.dt > 0.0)) throw std::invalid_argument("StepOperators: time step must be positive");
  if (!(params.alpha > 0.0)) throw std::invalid_argument("StepOperators: Robin parameter must be positive");
}

Vector StepOperators::lift_solid(const Vector& v) const { return lift_s_ * v; }
Vector StepOperators::lift_fluid(const Vector& v) const { return lift_f_ * v; }

Vector StepOperators::tangential_solid(const Vector& w) const {
  if (params_.a == 0.0) return Vector::Zero(w.size());
  return tangential_s_ * w;
}

Vector StepOperators::tangential_fluid(const Vector& u) const {
  if (params_.a == 0.0) return Vector::Zero(u.size());
  return tangential_f_ * u;
}

StepOperators make_step_operators(std::shared_ptr<const Discretization> disc, double dt, double alpha, double nu_f,
                                  double nu_s) {
  return StepOperators(std::move(disc), StepParameters{dt, alpha, nu_f, nu_s, 0.0, 1.0});
}

StepOperators make_modified_step_operators(std::shared_ptr<const Discretization> disc, double dt, double alpha,
                                           double nu_f, double nu_s) {
  if (nu_f != nu_s) throw std::invalid_argument("modified scheme requires equal diffusivities");
  const InterfaceFrame frame = interface_tangent_normal(disc->interface);
  return StepOperators(std::move(disc), StepParameters{dt, alpha, nu_f, nu_s, frame.a, frame.b});
}

// Steps -------------------------------------------------------------------------------

CoupledState prediction_step(const StepOperators& ops, const CoupledState& state, const Loads& loads_next) {
  return correction_step(ops, state, state, state, loads_next, CorrectionTerms::None);
}

CoupledState correction_step(const StepOperators& ops, const CoupledState& pred, const CoupledState& pred_next,
                             const CoupledState& corr, const Loads& loads, CorrectionTerms terms) {
  const Discretization& d = ops.disc();
  const StepParameters& p = ops.params();
  check_state(d, corr, "step");
  const bool full = terms == CorrectionTerms::Full;
  if (full) {
    check_state(d, pred, "correction_step");
    check_state(d, pred_next, "correction_step");
  }

  const double robin = p.b * p.alpha;
  const Vector u_trace = d.trace_f * corr.u;

  // Solid: M w'/dt + nu K w' + b alpha <w', z> + a nu <dw'/dtau, z>
  //      = M w/dt + b alpha <u, z> - <lambda, z> + (g2, z) [+ defect]
  Vector rhs_s = d.mass_s * corr.w / p.dt + robin * ops.lift_solid(u_trace) - ops.lift_solid(corr.lambda) + loads.solid;

  Vector delta_lambda0;
  if (full) {
    const Vector w_half = 0.5 * (pred_next.w + pred.w);
    const Vector lambda_half = 0.5 * (pred_next.lambda + pred.lambda);
    const Vector w_jump = pred_next.w - w_half;
    rhs_s += p.nu_s * (d.stiffness_s * w_jump);
    rhs_s += robin * ops.lift_solid(d.trace_s * (pred_next.w - pred.w));
    rhs_s += ops.lift_solid(pred.lambda - lambda_half);
    rhs_s += (p.a * p.nu_s) * ops.tangential_solid(w_jump);
    delta_lambda0 = pred_next.lambda - pred.lambda;
  }

  CoupledState next;
  next.t = corr.t + p.dt;
  next.w = ops.solid_solver().solve(rhs_s);
  const Vector w_trace = d.trace_s * next.w;

  // Fluid, with lambda' = lambda - alpha (u' - w') [+ delta lambda0] substituted.
  Vector carried = corr.lambda + p.alpha * w_trace;
  if (full) carried += delta_lambda0;
  Vector rhs_f = d.mass_f * corr.u / p.dt + ops.lift_fluid(carried) + loads.fluid;
  if (full) {
    const Vector u_half = 0.5 * (pred_next.u + pred.u);
    const Vector lambda_half = 0.5 * (pred_next.lambda + pred.lambda);
    const Vector u_jump = pred_next.u - u_half;
    rhs_f += p.nu_f * (d.stiffness_f * u_jump);
    rhs_f -= ops.lift_fluid(pred_next.lambda - lambda_half);
    rhs_f -= (p.a * p.nu_f) * ops.tangential_fluid(u_jump);
  }
  next.u = ops.fluid_solver().solve(rhs_f);

  next.lambda = corr.lambda - p.alpha * (d.trace_f * next.u - w_trace);
  if (full) next.lambda += delta_lambda0;
  return next;
}

CoupledState modified_prediction_step(const StepOperators& ops, const CoupledState& state, const Loads& loads_next) {
  return prediction_step(ops, state, loads_next);
}

CoupledState modified_correction_step(const StepOperators& ops, const CoupledState& pred,
                                      const CoupledState& pred_next, const CoupledState& corr, const Loads& loads) {
  return correction_step(ops, pred, pred_next, corr, loads, CorrectionTerms::Full);
}

// Monolithic reference ----------------------------------------------------------------

namespace {

SparseMatrix monolithic_matrix(const Discretization& d, double dt, double nu_f, double nu_s,
                               const std::vector<Index>& nodes) {
  const Index ns = d.solid.size(), nf = d.fluid.size(), nm = static_cast<Index>(nodes.size());
  // C = E M_sigma R, with E selecting the multiplier rows.
  std::vector<Eigen::Triplet<double>> sel;
  for (Index k = 0; k < nm; ++k) sel.emplace_back(k, nodes[k], 1.0);
  SparseMatrix e(nm, d.iface.mass.rows());
  e.setFromTriplets(sel.begin(), sel.end());
  const SparseMatrix cs = e * d.iface.mass * d.trace_s;
  const SparseMatrix cf = e * d.iface.mass * d.trace_f;
  const SparseMatrix as = d.mass_s / dt + nu_s * d.stiffness_s;
  const SparseMatrix af = d.mass_f / dt + nu_f * d.stiffness_f;

  std::vector<Eigen::Triplet<double>> t;
  const auto put = [&t](const SparseMatrix& m, Index r0, Index c0, double scale) {
    for (Index k = 0; k < m.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
    }
  };
  put(as, 0, 0, 1.0);
  put(SparseMatrix(cs.transpose()), 0, ns + nf, 1.0);
  put(af, ns, ns, 1.0);
  put(SparseMatrix(cf.transpose()), ns, ns + nf, -1.0);
  put(cs, ns + nf, 0, 1.0);
  put(cf, ns + nf, ns, -1.0);
  SparseMatrix out(ns + nf + nm, ns + nf + nm);
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

std::vector<Index> shared_interface_nodes(const Discretization& d) {
  std::vector<Index> nodes;
  for (Index i = 0; i < d.solid.interface_size(); ++i) {
    if (d.solid.interface_dofs[i] >= 0 && d.fluid.interface_dofs[i] >= 0) nodes.push_back(i);
  }
  return nodes;
}

}  // namespace

MonolithicOperator::MonolithicOperator(std::shared_ptr<const Discretization> disc, double dt, double nu_f,
                                       double nu_s)
    : disc_(std::move(disc)),
      dt_(dt),
      nodes_(shared_interface_nodes(*disc_)),
      matrix_(monolithic_matrix(*disc_, dt, nu_f, nu_s, nodes_)),
      solver_(matrix_, StepSolver::Kind::LU) {}

CoupledState MonolithicOperator::step(const CoupledState& state, const Loads& loads_next) const {
  const Discretization& d = *disc_;
  check_state(d, state, "monolithic_step");
  const Index ns = d.solid.size(), nf = d.fluid.size();
  Vector rhs = Vector::Zero(matrix_.rows());
  rhs.head(ns) = d.mass_s * state.w / dt_ + loads_next.solid;
  rhs.segment(ns, nf) = d.mass_f * state.u / dt_ + loads_next.fluid;
  const Vector x = solver_.solve(rhs);
  if (!x.allFinite()) throw SolverError("monolithic_step: singular system");

  CoupledState next;
  next.t = state.t + dt_;
  next.w = x.head(ns);
  next.u = x.segment(ns, nf);
  next.lambda = Vector::Zero(d.solid.interface_size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) next.lambda[nodes_[k]] = x[ns + nf + static_cast<Index>(k)];
  return next;
}

CoupledState monolithic_step(const MonolithicOperator& op, const CoupledState& state, const Loads& loads_next) {
  return op.step(state, loads_next);
}

// Trajectories ------------------------------------------------------------------------

int step_count(double final_time, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (final_time < 0.0) throw std::invalid_argument("final time must be non-negative");
  const double ratio = final_time / dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9) {
    throw std::invalid_argument("final time is not an integer multiple of the time step");
  }
  return static_cast<int>(steps);
}

SpaceTimeFunction multiplier_target(const ProblemSpec& problem, Scheme scheme) {
  if (is_modified(scheme)) {
    return [problem](const Point2& x, double t) { return problem.side_flux(x, t); };
  }
  return [problem](const Point2& x, double t) { return problem.flux(x, t); };
}

CoupledState initial_state(const Discretization& disc, const ProblemSpec& problem, Scheme scheme) {
  CoupledState s;
  s.t = 0.0;
  s.w = interpolate(disc.mesh, disc.solid, problem.w.value, 0.0);
  s.u = interpolate(disc.mesh, disc.fluid, problem.u.value, 0.0);
  s.lambda = project_interface(disc.mesh, disc.iface, multiplier_target(problem, scheme), 0.0);
  return s;
}

namespace {

double mass_norm(const SparseMatrix& mass, const Vector& v) { return std::sqrt(std::max(0.0, v.dot(mass * v))); }

void dump_state(std::ostream& os, const Discretization& d, const CoupledState& s) {
  os << std::setprecision(10) << s.t << ',' << mass_norm(d.mass_s, s.w) << ',' << mass_norm(d.mass_f, s.u) << ','
     << mass_norm(d.iface.mass, s.lambda) << '\n';
}

void push_level(std::vector<CoupledState>& levels, CoupledState state, bool keep_history) {
  if (!keep_history && levels.size() >= 2) levels.erase(levels.begin());
  levels.push_back(std::move(state));
}

}  // namespace

Trajectory run_trajectory(Scheme scheme, const ProblemSpec& problem, double dt, const TrajectoryOptions& options) {
  const double final_time = options.final_time < 0.0 ? problem.final_time : options.final_time;
  const int steps = step_count(final_time, dt);
  const int n = options.subdivisions > 0 ? options.subdivisions : static_cast<int>(std::lround(1.0 / dt));
  if (is_modified(scheme) && problem.nu_f != problem.nu_s) {
    throw std::invalid_argument("modified schemes require nu_f == nu_s");
  }

  Trajectory traj;
  traj.scheme = scheme;
  traj.dt = dt;
  traj.steps = steps;
  traj.disc = options.discretization ? options.discretization
                                     : make_discretization(n, problem.interface, problem.bc);
  const Discretization& d = *traj.disc;

  const CoupledState init = initial_state(d, problem, scheme);
  traj.prediction.push_back(init);
  traj.output.push_back(init);
  if (options.dump) {
    *options.dump << "t,norm_w,norm_u,norm_lambda\n";
    dump_state(*options.dump, d, init);
  }
  if (steps == 0) return traj;

  Loads loads_prev = assemble_loads(d, problem, 0.0);

  if (scheme == Scheme::Monolithic) {
    const MonolithicOperator op(traj.disc, dt, problem.nu_f, problem.nu_s);
    for (int k = 1; k <= steps; ++k) {
      const Loads loads_next = assemble_loads(d, problem, k * dt);
      CoupledState next = op.step(traj.output.back(), loads_next);
      next.t = k * dt;
      push_level(traj.output, std::move(next), options.keep_history);
      const StepRecord rec{k, dt, traj.output[traj.output.size() - 2], traj.output.back(), nullptr, nullptr};
      for (const auto& obs : options.observers) obs(rec);
      if (options.dump) dump_state(*options.dump, d, traj.output.back());
    }
    traj.prediction = traj.output;
    return traj;
  }

  const StepOperators ops = is_modified(scheme)
                                ? make_modified_step_operators(traj.disc, dt, problem.alpha, problem.nu_f, problem.nu_s)
                                : make_step_operators(traj.disc, dt, problem.alpha, problem.nu_f, problem.nu_s);
  const bool correct = has_correction(scheme);

  for (int k = 1; k <= steps; ++k) {
    const double t_next = k * dt;
    const Loads loads_next = assemble_loads(d, problem, t_next);
    CoupledState pred_next = prediction_step(ops, traj.prediction.back(), loads_next);
    pred_next.t = t_next;
    if (!pred_next.w.allFinite() || !pred_next.u.allFinite() || !pred_next.lambda.allFinite()) {
      throw SolverError("prediction step produced non-finite values");
    }

    if (correct) {
      const CoupledState& pred = traj.prediction.back();
      CoupledState corr_next =
          options.augment
              ? correction_step(ops, pred, pred_next, traj.output.back(), average(loads_prev, loads_next))
              : correction_step(ops, pred, pred_next, traj.output.back(), loads_next, CorrectionTerms::None);
      corr_next.t = t_next;
      push_level(traj.prediction, std::move(pred_next), options.keep_history);
      push_level(traj.output, std::move(corr_next), options.keep_history);
      const auto& p = traj.prediction;
      const auto& o = traj.output;
      const StepRecord rec{k, dt, p[p.size() - 2], p.back(), &o[o.size() - 2], &o.back()};
      for (const auto& obs : options.observers) obs(rec);
    } else {
      push_level(traj.prediction, std::move(pred_next), options.keep_history);
      const auto& p = traj.prediction;
      const StepRecord rec{k, dt, p[p.size() - 2], p.back(), nullptr, nullptr};
      for (const auto& obs : options.observers) obs(rec);
    }
    if (options.dump) dump_state(*options.dump, d, correct ? traj.output.back() : traj.prediction.back());
    loads_prev = loads_next;
  }
  if (!correct) traj.output = traj.prediction;
  return traj;
}

}  // namespace rrdc
