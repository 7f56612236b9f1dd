#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "rrdc/analysis.hpp"
#include "rrdc/schemes.hpp"
#include "support.hpp"

using namespace rrdc;

namespace {

struct Setup {
  std::shared_ptr<const Discretization> disc;
  oracle::Params params;
  bool modified;
};

std::vector<Setup> oracle_setups(int n) {
  const auto neumann = make_discretization(n, InterfaceSpec::Slanted(0.25, 0.75), BoundaryKind::NeumannSides);
  const auto horizontal = make_discretization(n, InterfaceSpec::Horizontal(0.75), BoundaryKind::NeumannSides);
  const auto dirichlet = make_discretization(n, InterfaceSpec::Slanted(0.25, 0.75), BoundaryKind::DirichletSides);
  const InterfaceFrame fr = interface_tangent_normal(dirichlet->interface);
  return {
      {neumann, {0.125, 4.0, 1.0, 1.0}, false},
      {horizontal, {0.1, 3.0, 2.0, 1.0}, false},
      {dirichlet, {0.25, 4.0, 1.0, 1.0}, false},
      {dirichlet, {0.125, 4.0, 1.0, 1.0, fr.a, fr.b}, true},
      {dirichlet, {0.05, 2.0, 0.7, 0.7, fr.a, fr.b}, true},
  };
}

StepOperators make_ops(const Setup& s) {
  const auto& p = s.params;
  return s.modified ? make_modified_step_operators(s.disc, p.dt, p.alpha, p.nu_f, p.nu_s)
                    : make_step_operators(s.disc, p.dt, p.alpha, p.nu_f, p.nu_s);
}

Vector concat(const CoupledState& s) {
  Vector v(s.w.size() + s.u.size() + s.lambda.size());
  v << s.w, s.u, s.lambda;
  return v;
}

bool bitwise_equal(const CoupledState& a, const CoupledState& b) {
  return a.w == b.w && a.u == b.u && a.lambda == b.lambda;
}

CoupledState zero_state(const Discretization& d) {
  return {0.0, Vector::Zero(d.solid.size()), Vector::Zero(d.fluid.size()), Vector::Zero(d.solid.interface_size())};
}

Loads zero_loads(const Discretization& d) { return {Vector::Zero(d.solid.size()), Vector::Zero(d.fluid.size())}; }

double interface_integral(const Discretization& d, const Vector& trace_values) {
  return Vector::Ones(trace_values.size()).dot(d.iface.mass * trace_values);
}

}  // namespace

TEST_CASE("split steps match the dense block system") {
  std::mt19937 rng(17);
  for (int n : {2, 3, 4}) {
    for (const Setup& s : oracle_setups(n)) {
      CAPTURE(n);
      CAPTURE(s.modified);
      const oracle::System sys = oracle::dense_system(*s.disc);
      const StepOperators ops = make_ops(s);
      const CoupledState state = oracle::random_state(*s.disc, rng);
      const Loads loads = oracle::random_loads(*s.disc, rng);

      const CoupledState pred = s.modified ? modified_prediction_step(ops, state, loads) : prediction_step(ops, state, loads);
      CHECK(oracle::rel_diff(pred, oracle::block_step(sys, s.params, state, loads)) < 1e-10);

      const CoupledState p0 = oracle::random_state(*s.disc, rng);
      const CoupledState p1 = oracle::random_state(*s.disc, rng);
      const CoupledState corr = s.modified ? modified_correction_step(ops, p0, p1, state, loads)
                                           : correction_step(ops, p0, p1, state, loads);
      CHECK(oracle::rel_diff(corr, oracle::block_step(sys, s.params, state, loads, &p0, &p1)) < 1e-10);

      if (!s.modified) {
        const MonolithicOperator mono(s.disc, s.params.dt, s.params.nu_f, s.params.nu_s);
        CHECK(oracle::rel_diff(monolithic_step(mono, state, loads), oracle::monolithic_step(sys, s.params, state, loads)) <
              1e-10);
      }
    }
  }
}

TEST_CASE("constant prediction states add nothing to the correction") {
  // w0' = w0, lambda0' = lambda0 makes every defect term cancel.
  std::mt19937 rng(4);
  for (const Setup& s : oracle_setups(2)) {
    const StepOperators ops = make_ops(s);
    const CoupledState corr = oracle::random_state(*s.disc, rng);
    const CoupledState p = oracle::random_state(*s.disc, rng);
    const Loads zero = zero_loads(*s.disc);
    const CoupledState full = correction_step(ops, p, p, corr, zero, CorrectionTerms::Full);
    const CoupledState plain = correction_step(ops, p, p, corr, zero, CorrectionTerms::None);
    CHECK(oracle::rel_diff(full, plain) < 1e-13);
    const oracle::System sys = oracle::dense_system(*s.disc);
    CHECK(oracle::rel_diff(full, oracle::block_step(sys, s.params, corr, zero)) < 1e-10);
  }
}

TEST_CASE("zero prediction pair reduces correction to prediction") {
  std::mt19937 rng(5);
  for (const Setup& s : oracle_setups(3)) {
    const StepOperators ops = make_ops(s);
    const CoupledState zero = zero_state(*s.disc);
    const CoupledState corr = oracle::random_state(*s.disc, rng);
    const Loads loads = oracle::random_loads(*s.disc, rng);
    CHECK(bitwise_equal(correction_step(ops, zero, zero, corr, loads), prediction_step(ops, corr, loads)));
  }
}

TEST_CASE("modified scheme on a horizontal interface is the plain scheme") {
  std::mt19937 rng(8);
  const auto disc = make_discretization(6, InterfaceSpec::Horizontal(0.5), BoundaryKind::DirichletSides);
  const StepOperators plain = make_step_operators(disc, 0.125, 4.0, 1.0, 1.0);
  const StepOperators mod = make_modified_step_operators(disc, 0.125, 4.0, 1.0, 1.0);
  CHECK_FALSE(mod.modified());
  const CoupledState s = oracle::random_state(*disc, rng);
  const CoupledState p0 = oracle::random_state(*disc, rng);
  const CoupledState p1 = oracle::random_state(*disc, rng);
  const Loads l = oracle::random_loads(*disc, rng);
  CHECK(bitwise_equal(modified_prediction_step(mod, s, l), prediction_step(plain, s, l)));
  CHECK(bitwise_equal(modified_correction_step(mod, p0, p1, s, l), correction_step(plain, p0, p1, s, l)));

  const ProblemSpec p = example_dirichlet();
  ProblemSpec h = p;
  h.interface = InterfaceSpec::Horizontal(0.5);
  const Trajectory a = run_trajectory(Scheme::Correction, h, 0.125);
  const Trajectory b = run_trajectory(Scheme::ModifiedCorrection, h, 0.125);
  CHECK(bitwise_equal(a.final_output(), b.final_output()));
}

TEST_CASE("modified operators") {
  const auto disc = make_discretization(4, InterfaceSpec::Slanted(0.25, 0.75), BoundaryKind::DirichletSides);
  const StepOperators ops = make_modified_step_operators(disc, 0.25, 4.0, 1.0, 1.0);
  CHECK(ops.params().a == doctest::Approx(-0.5));
  CHECK(ops.params().b == doctest::Approx(std::sqrt(5.0) / 2));
  CHECK(ops.modified());
  CHECK_FALSE(is_exactly_symmetric(ops.solid_matrix()));
  CHECK(ops.solid_solver().kind() == StepSolver::Kind::LU);
  CHECK_THROWS_AS(make_modified_step_operators(disc, 0.25, 4.0, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(run_trajectory(Scheme::ModifiedCorrection, example_viscosity(), 0.125), std::invalid_argument);
}

TEST_CASE("unmodified step operators are symmetric positive definite") {
  for (int n : {2, 4, 8}) {
    for (const Setup& s : oracle_setups(n)) {
      if (s.modified) continue;
      const StepOperators ops = make_ops(s);
      for (const SparseMatrix* m : {&ops.solid_matrix(), &ops.fluid_matrix()}) {
        CHECK(is_exactly_symmetric(*m));
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(*m)};
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
      }
      CHECK(ops.solid_solver().kind() == StepSolver::Kind::Cholesky);
      CHECK(ops.fluid_solver().kind() == StepSolver::Kind::Cholesky);
    }
  }
}

TEST_CASE("zero data gives a zero trajectory") {
  for (Scheme scheme : {Scheme::Prediction, Scheme::Correction, Scheme::ModifiedPrediction, Scheme::ModifiedCorrection,
                        Scheme::Monolithic}) {
    ProblemSpec z = example_zero();
    if (is_modified(scheme)) z.bc = BoundaryKind::DirichletSides;
    TrajectoryOptions opt;
    opt.keep_history = true;
    const Trajectory t = run_trajectory(scheme, z, 0.125, opt);
    CHECK(t.output.size() == 3);
    for (const auto* levels : {&t.output, &t.prediction}) {
      for (const CoupledState& s : *levels) CHECK(concat(s).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("trajectory bookkeeping") {
  const ProblemSpec p = example_neumann();
  TrajectoryOptions opt;
  opt.final_time = 0.0;
  const Trajectory t0 = run_trajectory(Scheme::Correction, p, 0.125, opt);
  CHECK(t0.steps == 0);
  REQUIRE(t0.output.size() == 1);
  CHECK(bitwise_equal(t0.final_output(), initial_state(*t0.disc, p, Scheme::Correction)));

  const Trajectory a = run_trajectory(Scheme::Correction, p, 0.0625);
  const Trajectory b = run_trajectory(Scheme::Correction, p, 0.0625);
  CHECK(a.steps == 4);
  CHECK(a.final_output().t == doctest::Approx(0.25));
  CHECK(bitwise_equal(a.final_output(), b.final_output()));
  CHECK(bitwise_equal(a.final_prediction(), b.final_prediction()));

  CHECK(step_count(0.25, 0.0625) == 4);
  CHECK(step_count(1.0, 0.1) == 10);
  CHECK_THROWS_AS(step_count(1.0, 0.33), std::invalid_argument);
  CHECK_THROWS_AS(run_trajectory(Scheme::Prediction, p, 0.33), std::invalid_argument);
  CHECK_THROWS_AS(scheme_from_string("crank"), std::invalid_argument);
  CHECK(scheme_from_string("modified-correction") == Scheme::ModifiedCorrection);
}

TEST_CASE("multiplier identity holds every step") {
  for (const ProblemSpec& p : {example_neumann(), example_viscosity(), example_dirichlet()}) {
    for (Scheme scheme : {Scheme::Prediction, Scheme::Correction}) {
      TrajectoryOptions opt;
      double worst = 0.0;
      int calls = 0;
      std::shared_ptr<const Discretization> disc = make_discretization(16, p.interface, p.bc);
      opt.discretization = disc;
      opt.observers.push_back([&](const StepRecord& r) {
        ++calls;
        const Discretization& d = *disc;
        const double alpha = p.alpha;
        const Vector res0 = r.pred_next.lambda - r.pred_prev.lambda +
                            alpha * (d.trace_f * r.pred_next.u - d.trace_s * r.pred_next.w);
        worst = std::max(worst, res0.cwiseAbs().maxCoeff() / std::max(1.0, r.pred_next.lambda.cwiseAbs().maxCoeff()));
        if (r.corr_next) {
          const Vector res1 = r.corr_next->lambda - r.corr_prev->lambda +
                              alpha * (d.trace_f * r.corr_next->u - d.trace_s * r.corr_next->w) -
                              (r.pred_next.lambda - r.pred_prev.lambda);
          worst = std::max(worst, res1.cwiseAbs().maxCoeff() / std::max(1.0, r.corr_next->lambda.cwiseAbs().maxCoeff()));
        }
      });
      run_trajectory(scheme, p, 0.0625, opt);
      CHECK(calls == 4);
      CHECK(worst < 1e-13);
    }
  }
}

TEST_CASE("correction without augmentation reproduces the prediction") {
  for (const ProblemSpec& p : {example_neumann(), example_viscosity()}) {
    TrajectoryOptions opt;
    opt.augment = false;
    opt.keep_history = true;
    const Trajectory c = run_trajectory(Scheme::Correction, p, 0.0625, opt);
    TrajectoryOptions popt;
    popt.keep_history = true;
    const Trajectory q = run_trajectory(Scheme::Prediction, p, 0.0625, popt);
    REQUIRE(c.output.size() == q.output.size());
    for (std::size_t k = 0; k < c.output.size(); ++k) CHECK(bitwise_equal(c.output[k], q.output[k]));
  }
}

TEST_CASE("operators are factored once per trajectory") {
  const ProblemSpec p = example_neumann();
  TrajectoryOptions shortrun, longrun;
  shortrun.final_time = 0.125;
  longrun.final_time = 1.0;
  const long c0 = factorization_count();
  run_trajectory(Scheme::Correction, p, 0.0625, shortrun);
  const long c1 = factorization_count();
  run_trajectory(Scheme::Correction, p, 0.0625, longrun);
  const long c2 = factorization_count();
  CHECK(c1 - c0 == 3);
  CHECK(c2 - c1 == 3);
}

TEST_CASE("monolithic step beats the prediction splitting error") {
  const ProblemSpec p = example_neumann();
  const double dt = 0.125;
  const auto disc = make_discretization(8, p.interface, p.bc);
  const CoupledState init = initial_state(*disc, p, Scheme::Prediction);
  const Loads loads = assemble_loads(*disc, p, dt);
  const CoupledState mono = monolithic_step(MonolithicOperator(disc, dt, 1.0, 1.0), init, loads);
  const CoupledState pred = prediction_step(make_step_operators(disc, dt, p.alpha, 1.0, 1.0), init, loads);
  const Vector w = interpolate(disc->mesh, disc->solid, p.w.value, dt);
  const Vector u = interpolate(disc->mesh, disc->fluid, p.u.value, dt);
  const auto err = [&](const CoupledState& s) {
    return std::hypot(l2_norm(disc->mass_s, w - s.w), l2_norm(disc->mass_f, u - s.u));
  };
  CHECK(err(mono) < err(pred));
}

TEST_CASE("conservation with natural conditions everywhere") {
  std::mt19937 rng(21);
  const auto disc = make_discretization(6, InterfaceSpec::Slanted(0.3, 0.6), BoundaryKind::AllNeumann);
  const Discretization& d = *disc;
  const Loads zero = zero_loads(d);
  const CoupledState s = oracle::random_state(d, rng);
  const auto total = [&](const CoupledState& x) {
    return Vector::Ones(x.w.size()).dot(d.mass_s * x.w) + Vector::Ones(x.u.size()).dot(d.mass_f * x.u);
  };

  const CoupledState mono = monolithic_step(MonolithicOperator(disc, 0.1, 1.0, 1.5), s, zero);
  CHECK(std::abs(total(mono) - total(s)) < 1e-10);

  // Robin-Robin steps conserve total mass plus dt * alpha * integral of the fluid trace.
  const double dt = 0.1, alpha = 3.0;
  const StepOperators ops = make_step_operators(disc, dt, alpha, 1.0, 1.5);
  const auto augmented = [&](const CoupledState& x) { return total(x) + dt * alpha * interface_integral(d, d.trace_f * x.u); };
  CoupledState x = s;
  for (int k = 0; k < 5; ++k) {
    const CoupledState y = prediction_step(ops, x, zero);
    CHECK(std::abs(augmented(y) - augmented(s)) < 1e-10);
    x = y;
  }
}

TEST_CASE("stability sweep") {
  const ProblemSpec p = example_neumann();
  for (double alpha : {1.0, 4.0, 16.0}) {
    for (Scheme scheme : {Scheme::Prediction, Scheme::Correction}) {
      CAPTURE(alpha);
      ProblemSpec q = p;
      q.alpha = alpha;
      TrajectoryOptions opt;
      opt.final_time = 1.0;
      opt.discretization = make_discretization(10, q.interface, q.bc);
      const Discretization& d = *opt.discretization;
      const CoupledState init = initial_state(d, q, scheme);
      const double bound = 10.0 * (l2_norm(d.mass_s, init.w) + l2_norm(d.mass_f, init.u));
      bool finite = true, bounded = true;
      opt.observers.push_back([&](const StepRecord& r) {
        const CoupledState& s = r.corr_next ? *r.corr_next : r.pred_next;
        finite = finite && concat(s).allFinite() && concat(r.pred_next).allFinite();
        bounded = bounded && l2_norm(d.mass_s, s.w) + l2_norm(d.mass_f, s.u) < bound;
      });
      const Trajectory t = run_trajectory(scheme, q, 0.1, opt);
      CHECK(t.steps == 10);
      CHECK(finite);
      CHECK(bounded);
    }
  }
}

TEST_CASE("state dump") {
  std::ostringstream os;
  TrajectoryOptions opt;
  opt.dump = &os;
  run_trajectory(Scheme::Prediction, example_neumann(), 0.0625, opt);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,norm_w,norm_u,norm_lambda");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
}
