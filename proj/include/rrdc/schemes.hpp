#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "rrdc/assembly.hpp"
#include "rrdc/mesh.hpp"
#include "rrdc/problems.hpp"
#include "rrdc/sparse.hpp"

namespace rrdc {

enum class Scheme { Prediction, Correction, ModifiedPrediction, ModifiedCorrection, Monolithic };

std::string to_string(Scheme scheme);
/// Accepts prediction, correction, modified-prediction, modified-correction, monolithic.
Scheme scheme_from_string(const std::string& name);
bool is_modified(Scheme scheme);
bool has_correction(Scheme scheme);

/// Discrete fields at one time level. `lambda` holds one value per interface
/// vertex, including Dirichlet-constrained endpoints.
struct CoupledState {
  double t = 0.0;
  Vector w;
  Vector u;
  Vector lambda;
};

/// Mesh, unknown numbering and every operator that does not depend on the time
/// step or the diffusivities.
struct Discretization {
  Mesh mesh;
  InterfaceSpec interface;
  BoundaryKind bc = BoundaryKind::NeumannSides;
  DofMap solid;
  DofMap fluid;
  SparseMatrix mass_s, mass_f;
  SparseMatrix stiffness_s, stiffness_f;  // unit diffusivity
  InterfaceOperator iface;
  SparseMatrix trace_s, trace_f;  // interface values <- subdomain unknowns
};

std::shared_ptr<const Discretization> make_discretization(int n, const InterfaceSpec& spec, BoundaryKind bc);

struct Loads {
  Vector solid;
  Vector fluid;
};

Loads assemble_loads(const Discretization& disc, const ProblemSpec& problem, double t);
Loads average(const Loads& a, const Loads& b);

/// Time-step parameters. (a, b) decompose the fluid normal as
/// n_f = a * tangent + b * side; a = 0, b = 1 gives the plain Robin-Robin scheme.
struct StepParameters {
  double dt = 0.0;
  double alpha = 4.0;
  double nu_f = 1.0;
  double nu_s = 1.0;
  double a = 0.0;
  double b = 1.0;
};

/// Factored subdomain operators shared by the prediction and correction steps.
///
///   solid:  M_s/dt + nu_s K_s + b alpha B_s + a nu T_s
///   fluid:  M_f/dt + nu_f K_f +   alpha B_f - a nu T_f
///
/// B is the interface mass and T the tangential-derivative form, both pulled
/// back to subdomain unknowns. Each matrix is factored exactly once.
class StepOperators {
 public:
  StepOperators(std::shared_ptr<const Discretization> disc, const StepParameters& params);

  const Discretization& disc() const { return *disc_; }
  const std::shared_ptr<const Discretization>& disc_ptr() const { return disc_; }
  const StepParameters& params() const { return params_; }
  bool modified() const { return params_.a != 0.0 || params_.b != 1.0; }

  const SparseMatrix& solid_matrix() const { return solid_matrix_; }
  const SparseMatrix& fluid_matrix() const { return fluid_matrix_; }
  const StepSolver& solid_solver() const { return solid_solver_; }
  const StepSolver& fluid_solver() const { return fluid_solver_; }

  /// trace^T M_sigma v: interface data tested against subdomain hats.
  Vector lift_solid(const Vector& interface_values) const;
  Vector lift_fluid(const Vector& interface_values) const;
  /// trace^T T trace v; zero vector when a == 0.
  Vector tangential_solid(const Vector& w) const;
  Vector tangential_fluid(const Vector& u) const;

 private:
  std::shared_ptr<const Discretization> disc_;
  StepParameters params_;
  SparseMatrix lift_s_, lift_f_;
  SparseMatrix tangential_s_, tangential_f_;
  SparseMatrix solid_matrix_, fluid_matrix_;
  StepSolver solid_solver_;
  StepSolver fluid_solver_;
};

/// Plain scheme operators for the given diffusivities.
StepOperators make_step_operators(std::shared_ptr<const Discretization> disc, double dt, double alpha, double nu_f,
                                  double nu_s);
/// Tangentially split operators; requires nu_f == nu_s.
StepOperators make_modified_step_operators(std::shared_ptr<const Discretization> disc, double dt, double alpha,
                                           double nu_f, double nu_s);

/// Robin-Robin step: solid solve, fluid solve with the multiplier eliminated
/// nodewise, explicit multiplier update.
CoupledState prediction_step(const StepOperators& ops, const CoupledState& state, const Loads& loads_next);

enum class CorrectionTerms { Full, None };

/// Same left-hand sides as `prediction_step`; the right-hand sides carry the
/// defect of the prediction pair (pred, pred_next). `loads` should be the time
/// average of the nodal loads at t_n and t_{n+1}. With CorrectionTerms::None the
/// step is a plain prediction step from `corr`.
CoupledState correction_step(const StepOperators& ops, const CoupledState& pred, const CoupledState& pred_next,
                             const CoupledState& corr, const Loads& loads,
                             CorrectionTerms terms = CorrectionTerms::Full);

/// Prediction/correction with operators from `make_modified_step_operators`.
CoupledState modified_prediction_step(const StepOperators& ops, const CoupledState& state, const Loads& loads_next);
CoupledState modified_correction_step(const StepOperators& ops, const CoupledState& pred,
                                      const CoupledState& pred_next, const CoupledState& corr, const Loads& loads);

/// Implicit Euler for the fully coupled problem with the multiplier enforcing
/// trace continuity. Indefinite; solved with a sparse LU. Reference only.
class MonolithicOperator {
 public:
  MonolithicOperator(std::shared_ptr<const Discretization> disc, double dt, double nu_f, double nu_s);

  const Discretization& disc() const { return *disc_; }
  double dt() const { return dt_; }
  const SparseMatrix& matrix() const { return matrix_; }
  // Interface positions carrying a multiplier unknown.
  const std::vector<Index>& multiplier_nodes() const { return nodes_; }

  CoupledState step(const CoupledState& state, const Loads& loads_next) const;

 private:
  std::shared_ptr<const Discretization> disc_;
  double dt_;
  std::vector<Index> nodes_;
  SparseMatrix matrix_;
  StepSolver solver_;
};

CoupledState monolithic_step(const MonolithicOperator& op, const CoupledState& state, const Loads& loads_next);

// Trajectories ----------------------------------------------------------------------

/// Handed to observers after every step. `corr_prev`/`corr_next` are null for
/// schemes without a correction pass.
struct StepRecord {
  int step = 0;  // index of the new level, 1..N
  double dt = 0.0;
  const CoupledState& pred_prev;
  const CoupledState& pred_next;
  const CoupledState* corr_prev = nullptr;
  const CoupledState* corr_next = nullptr;
};

using StepObserver = std::function<void(const StepRecord&)>;

struct TrajectoryOptions {
  int subdivisions = 0;       // 0: n = round(1/dt), i.e. h = dt
  double final_time = -1.0;   // < 0: the problem's final time
  bool augment = true;        // false: correction pass without defect terms
  bool keep_history = false;  // false: keep only the last two levels
  std::vector<StepObserver> observers;
  std::ostream* dump = nullptr;  // per-step CSV t,norm_w,norm_u,norm_lambda
  // Reused when set; must have been built for the problem's geometry.
  std::shared_ptr<const Discretization> discretization;
};

struct Trajectory {
  Scheme scheme = Scheme::Prediction;
  std::shared_ptr<const Discretization> disc;
  int steps = 0;
  double dt = 0.0;
  // Scheme output (correction states for correction schemes). Full history or
  // the last two levels.
  std::vector<CoupledState> output;
  // Prediction states; equal to `output` for single-pass schemes.
  std::vector<CoupledState> prediction;

  const CoupledState& final_output() const { return output.back(); }
  const CoupledState& final_prediction() const { return prediction.back(); }
  /// Prediction at level N-1 (the initial state when N = 0).
  const CoupledState& previous_prediction() const {
    return prediction.size() > 1 ? prediction[prediction.size() - 2] : prediction.back();
  }
};

/// Number of steps T/dt; throws std::invalid_argument unless integral to 1e-9.
int step_count(double final_time, double dt);

/// Multiplier target of the scheme: nu_f grad(u).n_f, or b nu grad(u).s for the
/// modified schemes.
SpaceTimeFunction multiplier_target(const ProblemSpec& problem, Scheme scheme);

/// Initial state: nodal interpolants of the exact data and the L2(interface)
/// projection of the multiplier target at t = 0.
CoupledState initial_state(const Discretization& disc, const ProblemSpec& problem, Scheme scheme);

Trajectory run_trajectory(Scheme scheme, const ProblemSpec& problem, double dt, const TrajectoryOptions& options = {});

}  // namespace rrdc
