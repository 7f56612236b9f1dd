#include "rrdc/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace rrdc {

double l2_norm(const SparseMatrix& mass, const Vector& v) { return std::sqrt(std::max(0.0, v.dot(mass * v))); }

double h1_seminorm(const SparseMatrix& stiffness, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(stiffness * v)));
}

namespace {

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

double sum_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

// Final-time errors ------------------------------------------------------------------

ErrorState error_state(const Discretization& d, const ProblemSpec& problem, Scheme scheme, const CoupledState& s) {
  ErrorState e;
  e.w = interpolate(d.mesh, d.solid, problem.w.value, s.t) - s.w;
  e.u = interpolate(d.mesh, d.fluid, problem.u.value, s.t) - s.u;
  e.lambda = interpolate_interface(d.mesh, multiplier_target(problem, scheme), s.t) - s.lambda;
  return e;
}

ErrorRecord error_norms(const Discretization& d, const ProblemSpec& problem, Scheme scheme,
                        const CoupledState& output_final, const CoupledState& prediction_final,
                        const CoupledState& prediction_previous, double dt) {
  const ErrorState out = error_state(d, problem, scheme, output_final);
  const ErrorState pred = error_state(d, problem, scheme, prediction_final);
  const ErrorState prev = error_state(d, problem, scheme, prediction_previous);

  ErrorRecord r;
  r.dt = dt;
  r.e_u1 = l2_norm(d.mass_f, out.u);
  r.e_w1 = l2_norm(d.mass_s, out.w);
  r.e_du1 = h1_seminorm(d.stiffness_f, out.u);
  r.e_u0 = l2_norm(d.mass_f, pred.u);
  r.e_w0 = l2_norm(d.mass_s, pred.w);
  r.e_du0 = h1_seminorm(d.stiffness_f, pred.u);
  r.e_lambda = l2_norm(d.iface.mass, pred.lambda);
  r.e_1lambda = l2_norm(d.iface.mass, pred.lambda - prev.lambda);
  return r;
}

ErrorRecord error_norms(const Trajectory& traj, const ProblemSpec& problem) {
  return error_norms(*traj.disc, problem, traj.scheme, traj.final_output(), traj.final_prediction(),
                     traj.previous_prediction(), traj.dt);
}

double column_value(const ErrorRecord& r, ErrorColumn c) {
  switch (c) {
    case ErrorColumn::U1: return r.e_u1;
    case ErrorColumn::W1: return r.e_w1;
    case ErrorColumn::Lambda: return r.e_lambda;
    case ErrorColumn::OneLambda: return r.e_1lambda;
    case ErrorColumn::DU1: return r.e_du1;
    case ErrorColumn::U0: return r.e_u0;
    case ErrorColumn::W0: return r.e_w0;
    case ErrorColumn::DU0: return r.e_du0;
  }
  return 0.0;
}

std::string column_name(ErrorColumn c) {
  switch (c) {
    case ErrorColumn::U1: return "e_u1";
    case ErrorColumn::W1: return "e_w1";
    case ErrorColumn::Lambda: return "e_lambda";
    case ErrorColumn::OneLambda: return "e_1lambda";
    case ErrorColumn::DU1: return "e_du1";
    case ErrorColumn::U0: return "e_u0";
    case ErrorColumn::W0: return "e_w0";
    case ErrorColumn::DU0: return "e_du0";
  }
  return "?";
}

// Rates --------------------------------------------------------------------------------

std::vector<std::optional<double>> convergence_rates(const std::vector<double>& errors) {
  std::vector<std::optional<double>> rates(errors.size());
  for (std::size_t k = 1; k < errors.size(); ++k) rates[k] = std::log2(errors[k - 1] / errors[k]);
  return rates;
}

double fitted_rate(const std::vector<double>& dts, const std::vector<double>& values) {
  if (dts.size() != values.size() || dts.size() < 2) {
    throw std::invalid_argument("fitted_rate: need at least two matching samples");
  }
  const double n = static_cast<double>(dts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double x = -std::log(dts[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Prediction diagnostics ---------------------------------------------------------------------

double DiagnosticSeries::difference_energy() const {
  double grad_sum = 0.0;
  for (std::size_t i = 0; i < grad_du.size(); ++i) grad_sum += nu_f * grad_du[i] * grad_du[i];
  for (std::size_t i = 0; i < grad_dw.size(); ++i) grad_sum += nu_s * grad_dw[i] * grad_dw[i];
  const double mu = max_of(du_l2), mw = max_of(dw_l2);
  return mw * mw + mu * mu + dt * grad_sum;
}

double DiagnosticSeries::second_difference_sum() const {
  double s = 0.0;
  for (double x : second_difference) s += x;
  return dt * s;
}

double DiagnosticSeries::multiplier_difference_sum() const { return dt * sum_sq(dlambda); }
double DiagnosticSeries::max_gradient_difference() const { return max_of(grad_du); }
double DiagnosticSeries::max_du() const { return max_of(du_l2); }
double DiagnosticSeries::max_dw() const { return max_of(dw_l2); }

namespace {

struct DiagnosticAccumulator {
  std::shared_ptr<const Discretization> disc;
  ProblemSpec problem;
  Scheme scheme;
  DiagnosticSeries* out;
  Vector previous_du;  // U0^n - U0^{n-1}
  bool has_previous = false;

  void operator()(const StepRecord& rec) {
    const Discretization& d = *disc;
    const ErrorState e0 = error_state(d, problem, scheme, rec.pred_prev);
    const ErrorState e1 = error_state(d, problem, scheme, rec.pred_next);
    const Vector du = e1.u - e0.u;
    const Vector dw = e1.w - e0.w;
    out->du_l2.push_back(l2_norm(d.mass_f, du));
    out->dw_l2.push_back(l2_norm(d.mass_s, dw));
    out->grad_du.push_back(h1_seminorm(d.stiffness_f, du));
    out->grad_dw.push_back(h1_seminorm(d.stiffness_s, dw));
    out->dlambda.push_back(l2_norm(d.iface.mass, e1.lambda - e0.lambda));
    if (has_previous) {
      const double g = h1_seminorm(d.stiffness_f, du - previous_du) / (rec.dt * rec.dt);
      out->second_difference.push_back(problem.nu_f * g * g);
    }
    previous_du = du;
    has_previous = true;
  }
};

}  // namespace

StepObserver prediction_diagnostics_observer(std::shared_ptr<const Discretization> disc, const ProblemSpec& problem,
                                             Scheme scheme, DiagnosticSeries& out) {
  out = DiagnosticSeries{};
  out.nu_f = problem.nu_f;
  out.nu_s = problem.nu_s;
  auto acc = std::make_shared<DiagnosticAccumulator>();
  acc->disc = std::move(disc);
  acc->problem = problem;
  acc->scheme = scheme;
  acc->out = &out;
  return [acc](const StepRecord& rec) {
    acc->out->dt = rec.dt;
    (*acc)(rec);
  };
}

DiagnosticSeries prediction_diagnostics(const Trajectory& traj, const ProblemSpec& problem) {
  DiagnosticSeries series;
  const StepObserver obs = prediction_diagnostics_observer(traj.disc, problem, traj.scheme, series);
  series.dt = traj.dt;
  if (traj.steps > 0 && static_cast<int>(traj.prediction.size()) != traj.steps + 1) {
    throw std::invalid_argument("prediction_diagnostics: trajectory was run without keep_history");
  }
  for (int k = 1; k <= traj.steps; ++k) {
    obs(StepRecord{k, traj.dt, traj.prediction[k - 1], traj.prediction[k], nullptr, nullptr});
  }
  return series;
}

// Energy -----------------------------------------------------------------------------------

double energy_z(const Discretization& d, double alpha, double dt, const ErrorState& e) {
  const double w = l2_norm(d.mass_s, e.w), u = l2_norm(d.mass_f, e.u);
  const double u_sigma = l2_norm(d.iface.mass, d.trace_f * e.u);
  const double l_sigma = l2_norm(d.iface.mass, e.lambda);
  return 0.5 * w * w + 0.5 * u * u + 0.5 * dt * alpha * u_sigma * u_sigma + dt / (2.0 * alpha) * l_sigma * l_sigma;
}

double energy_s(const Discretization& d, double alpha, double dt, double nu_f, double nu_s, const ErrorState& prev,
                const ErrorState& next) {
  const double gu = h1_seminorm(d.stiffness_f, next.u), gw = h1_seminorm(d.stiffness_s, next.w);
  const double dw = l2_norm(d.mass_s, next.w - prev.w), du = l2_norm(d.mass_f, next.u - prev.u);
  const Vector jump = d.trace_f * (prev.u - next.u) + (prev.lambda - next.lambda) / alpha;
  const double j = l2_norm(d.iface.mass, jump);
  return dt * (nu_f * gu * gu + nu_s * gw * gw) + 0.5 * (dw * dw + du * du) + 0.5 * alpha * dt * j * j;
}

double EnergySeries::max_z() const { return max_of(z); }

namespace {

struct EnergyAccumulator {
  std::shared_ptr<const Discretization> disc;
  ProblemSpec problem;
  Scheme scheme;
  EnergySeries* out;

  void operator()(const StepRecord& rec) {
    if (!rec.corr_prev || !rec.corr_next) return;
    const Discretization& d = *disc;
    const double a = problem.alpha, dt = rec.dt;
    const ErrorState e1p = error_state(d, problem, scheme, *rec.corr_prev);
    const ErrorState e1n = error_state(d, problem, scheme, *rec.corr_next);
    const ErrorState e0p = error_state(d, problem, scheme, rec.pred_prev);
    const ErrorState e0n = error_state(d, problem, scheme, rec.pred_next);
    if (out->z.empty()) out->z.push_back(energy_z(d, a, dt, e1p));
    const double z_next = energy_z(d, a, dt, e1n);
    const double s_next = energy_s(d, a, dt, problem.nu_f, problem.nu_s, e1p, e1n);

    const Vector dlam0 = e0n.lambda - e0p.lambda;  // Lambda0^{n+1} - Lambda0^n
    const auto sigma = [&d](const Vector& x, const Vector& y) { return x.dot(d.iface.mass * y); };
    const Vector w1_tr = d.trace_s * e1n.w;
    const Vector du1_tr = d.trace_f * (e1p.u - e1n.u);
    const double f = sigma(w1_tr, dlam0) - sigma(du1_tr, dlam0);

    const Vector dw0 = e0n.w - e0p.w, du0 = e0n.u - e0p.u;
    const double r1 = 0.5 * problem.nu_s * dw0.dot(d.stiffness_s * e1n.w) +
                      a * sigma(d.trace_s * dw0, w1_tr) - 0.5 * sigma(dlam0, w1_tr);
    const Vector u1_tr = d.trace_f * e1n.u;
    const double r2 = 0.5 * problem.nu_f * du0.dot(d.stiffness_f * e1n.u) - 0.5 * sigma(dlam0, u1_tr);
    const double coupling = dt / a * sigma(e1n.lambda, dlam0);

    out->residual.push_back(z_next + s_next - out->z.back() - dt * f - dt * (r1 + r2) - coupling);
    out->z.push_back(z_next);
    out->s.push_back(s_next);
  }
};

}  // namespace

StepObserver energy_observer(std::shared_ptr<const Discretization> disc, const ProblemSpec& problem, Scheme scheme,
                             EnergySeries& out) {
  out = EnergySeries{};
  auto acc = std::make_shared<EnergyAccumulator>();
  acc->disc = std::move(disc);
  acc->problem = problem;
  acc->scheme = scheme;
  acc->out = &out;
  return [acc](const StepRecord& rec) { (*acc)(rec); };
}

EnergySeries energy_series(const Trajectory& traj, const ProblemSpec& problem) {
  if (!has_correction(traj.scheme)) throw std::invalid_argument("energy_series: scheme has no correction pass");
  if (static_cast<int>(traj.output.size()) != traj.steps + 1) {
    throw std::invalid_argument("energy_series: trajectory was run without keep_history");
  }
  EnergySeries series;
  const StepObserver obs = energy_observer(traj.disc, problem, traj.scheme, series);
  for (int k = 1; k <= traj.steps; ++k) {
    obs(StepRecord{k, traj.dt, traj.prediction[k - 1], traj.prediction[k], &traj.output[k - 1], &traj.output[k]});
  }
  if (traj.steps == 0) {
    series.z.push_back(energy_z(*traj.disc, problem.alpha, traj.dt,
                                error_state(*traj.disc, problem, traj.scheme, traj.output.front())));
  }
  return series;
}

// Convergence studies ------------------------------------------------------------------------

bool ConvergenceReport::complete() const {
  return std::all_of(levels.begin(), levels.end(), [](const LevelResult& l) { return l.errors.has_value(); });
}

std::vector<double> ConvergenceReport::dts() const {
  std::vector<double> out;
  for (const auto& l : levels) out.push_back(l.dt);
  return out;
}

std::vector<double> ConvergenceReport::column(ErrorColumn c) const {
  std::vector<double> out;
  for (const auto& l : levels) {
    out.push_back(l.errors ? column_value(*l.errors, c) : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

std::vector<std::optional<double>> ConvergenceReport::rates(ErrorColumn c) const {
  auto r = convergence_rates(column(c));
  for (auto& x : r) {
    if (x && !std::isfinite(*x)) x.reset();
  }
  return r;
}

namespace {

LevelResult run_level(const ProblemSpec& problem, Scheme scheme, int level, bool diagnostics) {
  LevelResult result;
  result.level = level;
  result.dt = std::ldexp(1.0, -level);
  try {
    TrajectoryOptions opts;
    opts.subdivisions = 1 << level;
    DiagnosticSeries series;
    EnergySeries energy;
    if (diagnostics) {
      opts.discretization = make_discretization(opts.subdivisions, problem.interface, problem.bc);
      opts.observers.push_back(prediction_diagnostics_observer(opts.discretization, problem, scheme, series));
      if (has_correction(scheme)) {
        opts.observers.push_back(energy_observer(opts.discretization, problem, scheme, energy));
      }
    }
    const Trajectory traj = run_trajectory(scheme, problem, result.dt, opts);
    const ErrorRecord rec = error_norms(traj, problem);
    const double vals[] = {rec.e_u1, rec.e_w1, rec.e_du1, rec.e_lambda, rec.e_1lambda, rec.e_u0, rec.e_w0, rec.e_du0};
    for (double v : vals) {
      if (!std::isfinite(v)) throw SolverError("non-finite error norm");
    }
    result.errors = rec;
    if (diagnostics) {
      DiagnosticSummary s;
      s.max_du = series.max_du();
      s.max_dw = series.max_dw();
      s.difference_energy = series.difference_energy();
      s.second_difference_sum = series.second_difference_sum();
      s.multiplier_difference_sum = series.multiplier_difference_sum();
      s.max_gradient_difference = series.max_gradient_difference();
      s.max_energy_z = energy.max_z();
      result.diagnostics = s;
    }
  } catch (const std::exception& e) {
    result.failure = e.what();
  }
  return result;
}

}  // namespace

ConvergenceReport convergence_study(const ProblemSpec& problem, Scheme scheme, const std::vector<int>& levels,
                                    const StudyOptions& options) {
  if (levels.size() < 2) throw std::invalid_argument("convergence_study: need at least two levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) throw std::invalid_argument("convergence_study: levels must be ascending");
  }
  if (levels.front() < 1) throw std::invalid_argument("convergence_study: level must be at least 1");

  ProblemSpec p = problem;
  if (options.alpha > 0.0) p.alpha = options.alpha;

  ConvergenceReport report;
  report.problem = p.label;
  report.scheme = scheme;
  report.levels.resize(levels.size());

  const int workers = std::max(1, std::min<int>(options.threads, static_cast<int>(levels.size())));
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < levels.size(); i = next++) {
      report.levels[i] = run_level(p, scheme, levels[i], options.diagnostics);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return report;
}

// Serialization ------------------------------------------------------------------------------

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

const ErrorColumn kTableColumns[] = {ErrorColumn::U1, ErrorColumn::W1, ErrorColumn::Lambda, ErrorColumn::OneLambda,
                                     ErrorColumn::DU1};

}  // namespace

std::string to_csv(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "dt";
  for (ErrorColumn c : kTableColumns) os << ',' << column_name(c) << ",rate";
  os << '\n';
  std::vector<std::vector<std::optional<double>>> rates;
  for (ErrorColumn c : kTableColumns) rates.push_back(report.rates(c));
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& l = report.levels[i];
    os << fmt("%.9e", l.dt);
    for (std::size_t c = 0; c < std::size(kTableColumns); ++c) {
      os << ',';
      if (l.errors) os << fmt("%.9e", column_value(*l.errors, kTableColumns[c]));
      os << ',';
      if (rates[c][i]) os << fmt("%.9e", *rates[c][i]);
    }
    os << '\n';
  }
  return os.str();
}

std::string to_markdown(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "| dt |";
  for (ErrorColumn c : kTableColumns) os << ' ' << column_name(c) << " | rates |";
  os << "\n|---|";
  for (std::size_t c = 0; c < std::size(kTableColumns); ++c) os << "---|---|";
  os << '\n';
  std::vector<std::vector<std::optional<double>>> rates;
  for (ErrorColumn c : kTableColumns) rates.push_back(report.rates(c));
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& l = report.levels[i];
    os << "| (1/2)^" << l.level << " |";
    for (std::size_t c = 0; c < std::size(kTableColumns); ++c) {
      os << ' ' << (l.errors ? fmt("%.2e", column_value(*l.errors, kTableColumns[c])) : std::string("failed")) << " | "
         << (rates[c][i] ? fmt("%.2f", *rates[c][i]) : std::string("-")) << " |";
    }
    os << '\n';
  }
  for (const auto& l : report.levels) {
    if (!l.failure.empty()) os << "\nlevel " << l.level << " failed: " << l.failure << '\n';
  }
  return os.str();
}

std::string to_json(const ErrorRecord& r) {
  nlohmann::json j;
  j["dt"] = r.dt;
  j["e_u1"] = r.e_u1;
  j["e_w1"] = r.e_w1;
  j["e_du1"] = r.e_du1;
  j["e_lambda"] = r.e_lambda;
  j["e_1lambda"] = r.e_1lambda;
  j["e_u0"] = r.e_u0;
  j["e_w0"] = r.e_w0;
  j["e_du0"] = r.e_du0;
  return j.dump(2);
}

std::string diagnostics_csv(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "dt,max_du,max_dw,difference_energy,second_difference_sum,multiplier_difference_sum,"
        "max_gradient_difference,max_energy_z\n";
  std::vector<double> dts;
  std::vector<std::vector<double>> cols(7);
  for (const auto& l : report.levels) {
    os << fmt("%.9e", l.dt);
    if (l.diagnostics) {
      const auto& s = *l.diagnostics;
      const double v[] = {s.max_du,
                          s.max_dw,
                          s.difference_energy,
                          s.second_difference_sum,
                          s.multiplier_difference_sum,
                          s.max_gradient_difference,
                          s.max_energy_z};
      for (double x : v) os << ',' << fmt("%.9e", x);
      dts.push_back(l.dt);
      for (int c = 0; c < 7; ++c) cols[c].push_back(v[c]);
    } else {
      os << ",,,,,,,";
    }
    os << '\n';
  }
  os << "fitted_rate";
  for (const auto& c : cols) {
    os << ',';
    const bool positive = std::all_of(c.begin(), c.end(), [](double x) { return x > 0.0; });
    if (c.size() >= 2 && positive) os << fmt("%.9e", fitted_rate(dts, c));
  }
  os << '\n';
  return os.str();
}

// Rules --------------------------------------------------------------------------------------

std::vector<RateRule> default_rate_rules(const std::string& problem, Scheme scheme) {
  using C = ErrorColumn;
  if (problem == "neumann-slanted" && scheme == Scheme::Correction) {
    return {{C::U1, 3, 1.8, 2.3}, {C::W1, 3, 1.8, 2.3}, {C::DU1, 3, 1.8, 2.3}, {C::OneLambda, 3, 1.8, 2.3},
            {C::Lambda, 3, 0.9, 1.4}};
  }
  if (problem == "two-viscosity" && scheme == Scheme::Correction) {
    return {{C::U1, 1, 1.9, 2.1}, {C::W1, 1, 1.9, 2.1}, {C::DU1, 1, 1.9, 2.1}, {C::Lambda, 1, 0.9, 1.1},
            {C::OneLambda, 1, 1.8, 2.2}};
  }
  if (problem == "two-viscosity" && scheme == Scheme::Prediction) {
    return {{C::U1, 2, 0.8, 1.2}};
  }
  if (problem == "dirichlet-slanted" && scheme == Scheme::Correction) {
    return {{C::Lambda, 2, -std::numeric_limits<double>::infinity(), 0.7},
            {C::DU1, 1, -std::numeric_limits<double>::infinity(), 1.5}};
  }
  if (problem == "dirichlet-slanted" && scheme == Scheme::ModifiedCorrection) {
    return {{C::DU1, 1, 1.9, std::numeric_limits<double>::infinity()},
            {C::U1, 1, 1.9, std::numeric_limits<double>::infinity()},
            {C::OneLambda, 1, 1.9, 2.3}};
  }
  return {};
}

std::vector<std::pair<bool, std::string>> check_rules(const ConvergenceReport& report,
                                                      const std::vector<RateRule>& rules) {
  std::vector<std::pair<bool, std::string>> lines;
  for (const auto& rule : rules) {
    const auto rates = report.rates(rule.column);
    std::ostringstream os;
    bool ok = static_cast<int>(rates.size()) > rule.pairs;
    os << column_name(rule.column) << " rates [";
    for (int k = 0; k < rule.pairs && k + 1 < static_cast<int>(rates.size()); ++k) {
      const auto& r = rates[rates.size() - rule.pairs + k];
      if (k) os << ", ";
      if (r) {
        os << fmt("%.3f", *r);
        ok = ok && *r >= rule.lo && *r <= rule.hi;
      } else {
        os << "n/a";
        ok = false;
      }
    }
    os << "] in [" << fmt("%g", rule.lo) << ", " << fmt("%g", rule.hi) << "]";
    lines.emplace_back(ok, (ok ? "PASS " : "FAIL ") + os.str());
  }
  return lines;
}

}  // namespace rrdc
