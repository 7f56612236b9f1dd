#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rrdc/problems.hpp"
#include "rrdc/schemes.hpp"

namespace rrdc {

// Norms ----------------------------------------------------------------------------

/// sqrt(v^T M v) for a mass-type matrix.
double l2_norm(const SparseMatrix& mass, const Vector& v);
/// Unweighted H1 seminorm through a unit-diffusivity stiffness matrix.
double h1_seminorm(const SparseMatrix& stiffness, const Vector& v);

// Final-time errors ------------------------------------------------------------------

/// Errors at T against nodal interpolants of the exact solution. The `*1`
/// fields belong to the scheme output (correction pass when there is one), the
/// `*0` fields to the prediction pass. e_lambda and e_1lambda always use the
/// prediction multiplier. For single-pass schemes both sets coincide.
struct ErrorRecord {
  double dt = 0.0;
  double e_u1 = 0.0;
  double e_w1 = 0.0;
  double e_du1 = 0.0;
  double e_lambda = 0.0;
  double e_1lambda = 0.0;
  double e_u0 = 0.0;
  double e_w0 = 0.0;
  double e_du0 = 0.0;
};

ErrorRecord error_norms(const Discretization& disc, const ProblemSpec& problem, Scheme scheme,
                        const CoupledState& output_final, const CoupledState& prediction_final,
                        const CoupledState& prediction_previous, double dt);
ErrorRecord error_norms(const Trajectory& trajectory, const ProblemSpec& problem);

enum class ErrorColumn { U1, W1, Lambda, OneLambda, DU1, U0, W0, DU0 };
double column_value(const ErrorRecord& record, ErrorColumn column);
std::string column_name(ErrorColumn column);

// Rates --------------------------------------------------------------------------------

/// log2(e_{k-1}/e_k) for consecutive refinements (dt halves each level); the
/// first entry is empty.
std::vector<std::optional<double>> convergence_rates(const std::vector<double>& errors);
/// Least-squares slope of log(value) against log(1/dt).
double fitted_rate(const std::vector<double>& dts, const std::vector<double>& values);

// Prediction-step diagnostics -----------------------------------------------------------

/// Per-step time differences of the prediction errors U0 = I u - u0,
/// W0 = I w - w0, Lambda0 = I l - lambda0. Entry n refers to the pair (n, n+1).
struct DiagnosticSeries {
  double dt = 0.0;
  double nu_f = 1.0;
  double nu_s = 1.0;
  std::vector<double> du_l2;          // |U0^{n+1} - U0^n|_{L2(fluid)}
  std::vector<double> dw_l2;          // |W0^{n+1} - W0^n|_{L2(solid)}
  std::vector<double> grad_du;        // |grad(U0^{n+1} - U0^n)|_{L2(fluid)}
  std::vector<double> grad_dw;        // |grad(W0^{n+1} - W0^n)|_{L2(solid)}
  std::vector<double> dlambda;        // |Lambda0^{n+1} - Lambda0^n|_{L2(interface)}
  std::vector<double> second_difference;  // nu_f |grad(U0^{n+1} - 2U0^n + U0^{n-1})/dt^2|^2, n >= 1

  /// max|dW|^2 + max|dU|^2 + dt sum nu_f|grad dU|^2 + dt sum nu_s|grad dW|^2
  double difference_energy() const;
  /// dt sum of the second-difference quotients.
  double second_difference_sum() const;
  /// dt sum |dLambda|^2
  double multiplier_difference_sum() const;
  /// max |grad dU|
  double max_gradient_difference() const;
  double max_du() const;
  double max_dw() const;
};

/// Observer accumulating a DiagnosticSeries while a trajectory runs. The
/// series and the problem must outlive the run.
StepObserver prediction_diagnostics_observer(std::shared_ptr<const Discretization> disc, const ProblemSpec& problem,
                                             Scheme scheme, DiagnosticSeries& out);

/// Same quantities from a trajectory run with keep_history.
DiagnosticSeries prediction_diagnostics(const Trajectory& trajectory, const ProblemSpec& problem);

// Correction-step energy ------------------------------------------------------------------

/// Error components of one correction level (exact interpolant minus discrete).
struct ErrorState {
  Vector w;
  Vector u;
  Vector lambda;
};

ErrorState error_state(const Discretization& disc, const ProblemSpec& problem, Scheme scheme, const CoupledState& s);

/// Z = 1/2|W|^2 + 1/2|U|^2 + (dt alpha/2)|U|_S^2 + (dt/(2 alpha))|Lambda|_S^2
double energy_z(const Discretization& disc, double alpha, double dt, const ErrorState& e);
/// S^{n+1} = dt(nu_f|grad U'|^2 + nu_s|grad W'|^2) + 1/2(|W'-W|^2 + |U'-U|^2)
///           + (alpha dt/2)|(U - U') + (Lambda - Lambda')/alpha|_S^2
double energy_s(const Discretization& disc, double alpha, double dt, double nu_f, double nu_s, const ErrorState& prev,
                const ErrorState& next);

struct EnergySeries {
  std::vector<double> z;  // n = 0..N
  std::vector<double> s;  // n = 1..N (stored at index n-1)
  // Z^{n+1} + S^{n+1} - Z^n - dt F - dt R - (dt/alpha)<Lambda1^{n+1}, dLambda0>,
  // i.e. the part of the energy balance carried by the exact-solution
  // consistency functional plus spatial discretization effects.
  std::vector<double> residual;

  double max_z() const;
};

StepObserver energy_observer(std::shared_ptr<const Discretization> disc, const ProblemSpec& problem, Scheme scheme,
                             EnergySeries& out);
EnergySeries energy_series(const Trajectory& trajectory, const ProblemSpec& problem);

// Convergence studies ------------------------------------------------------------------------

struct DiagnosticSummary {
  double max_du = 0.0;
  double max_dw = 0.0;
  double difference_energy = 0.0;
  double second_difference_sum = 0.0;
  double multiplier_difference_sum = 0.0;
  double max_gradient_difference = 0.0;
  double max_energy_z = 0.0;
};

struct LevelResult {
  int level = 0;  // dt = h = 2^-level
  double dt = 0.0;
  std::optional<ErrorRecord> errors;
  std::optional<DiagnosticSummary> diagnostics;
  std::string failure;
};

struct ConvergenceReport {
  std::string problem;
  Scheme scheme = Scheme::Correction;
  std::vector<LevelResult> levels;

  bool complete() const;
  std::vector<double> dts() const;
  std::vector<double> column(ErrorColumn c) const;
  std::vector<std::optional<double>> rates(ErrorColumn c) const;
};

struct StudyOptions {
  int threads = 1;
  bool diagnostics = false;
  double alpha = -1.0;  // < 0: the problem's value
};

/// One trajectory per level k with dt = h = 2^-k. Levels must be ascending with
/// at least two entries. A failing level is recorded, not thrown.
ConvergenceReport convergence_study(const ProblemSpec& problem, Scheme scheme, const std::vector<int>& levels,
                                    const StudyOptions& options = {});

std::string to_csv(const ConvergenceReport& report);
std::string to_markdown(const ConvergenceReport& report);
std::string to_json(const ErrorRecord& record);
std::string diagnostics_csv(const ConvergenceReport& report);

/// Expected-rate rule checked by the CLI after a study.
struct RateRule {
  ErrorColumn column;
  int pairs = 1;  // number of finest level pairs that must satisfy the band
  double lo = 0.0;
  double hi = 0.0;
};

std::vector<RateRule> default_rate_rules(const std::string& problem, Scheme scheme);
/// One line per rule: "PASS|FAIL <column> rates [...] in [lo, hi]".
std::vector<std::pair<bool, std::string>> check_rules(const ConvergenceReport& report,
                                                      const std::vector<RateRule>& rules);

}  // namespace rrdc
