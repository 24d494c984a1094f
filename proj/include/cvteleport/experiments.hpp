// Declarative experiment scenarios, their reports, the calibration
// fitter that infers resource parameters from measured dB levels, and
// parameter sweeps.
//
// Report entry names by scenario kind:
//   coherent_teleport: corr_ab_x, corr_ab_p, duan_ab, sigma_x, sigma_p,
//                      fidelity, g_x, g_p (for quadratures with nonzero
//                      input mean), mc_mean_x/p, mc_sigma_x/p (shots)
//   epr_characterize:  ref_x, ref_p, in_x, in_p, corr_x, corr_p,
//                      duan_ref_in, below_half
//   entanglement_swap: duan_ref_in, duan_ab, out_x, out_p, corr_x,
//                      corr_p, duan_ref_out, entangled, additivity_gap,
//                      mc_out_x, mc_out_p (shots)
// Calibration observables: ref_x, ref_p, in_x, in_p, corr_x, corr_p
// (raw resource) and sigma_x, sigma_p (teleported-output variances).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cvteleport/gaussian.hpp"
#include "cvteleport/metrics.hpp"
#include "cvteleport/protocol.hpp"

namespace cvt {

enum class ScenarioKind {
  coherent_teleport,
  epr_characterize,
  entanglement_swap,
  gain_sweep,
  squeeze_sweep,
  calibrate,
};

inline std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::coherent_teleport: return "coherent_teleport";
    case ScenarioKind::epr_characterize: return "epr_characterize";
    case ScenarioKind::entanglement_swap: return "entanglement_swap";
    case ScenarioKind::gain_sweep: return "gain_sweep";
    case ScenarioKind::squeeze_sweep: return "squeeze_sweep";
    case ScenarioKind::calibrate: return "calibrate";
  }
  return "?";
}

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::coherent_teleport, ScenarioKind::epr_characterize,
                 ScenarioKind::entanglement_swap, ScenarioKind::gain_sweep,
                 ScenarioKind::squeeze_sweep, ScenarioKind::calibrate})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown scenario kind '" + s + "'");
}

struct CoherentInput {
  double x = 0.0;
  double p = 0.0;
};

/// Default input: amplitude 20.7 dB above the single-quadrature vacuum
/// level, displaced in p (phase modulation).
inline CoherentInput default_coherent_input() {
  return {0.0, std::sqrt(std::pow(10.0, 2.07) * kVacuumVariance)};
}

struct ShotRequest {
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

/// One acceptance target for a report entry. Exactly one of the three
/// forms is used: a dB level with reference and tolerance, a linear
/// value with tolerance, or a [min, max] window.
struct Target {
  std::string name;
  std::optional<double> db, db_ref, tol_db;
  std::optional<double> value, tol;
  std::optional<double> min, max;
};

enum class CalibrationModel { impure, pure, pure_loss };

inline std::string to_string(CalibrationModel m) {
  switch (m) {
    case CalibrationModel::impure: return "impure";
    case CalibrationModel::pure: return "pure";
    case CalibrationModel::pure_loss: return "pure_loss";
  }
  return "?";
}

inline CalibrationModel calibration_model_from_string(const std::string& s) {
  for (auto m : {CalibrationModel::impure, CalibrationModel::pure,
                 CalibrationModel::pure_loss})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown calibration model '" + s + "'");
}

struct CalibrationRequest {
  std::string resource = "epr1";  // which resource section is fitted
  CalibrationModel model = CalibrationModel::impure;
  std::vector<std::string> free_params;
  std::optional<double> max_residual_db;
  std::size_t max_iterations = 10000;
};

struct ExperimentScenario {
  std::string name = "scenario";
  ScenarioKind kind = ScenarioKind::coherent_teleport;
  EprSpec epr1{};
  EprSpec epr2{};
  bool has_epr1 = false;
  bool has_epr2 = false;
  TeleporterConfig teleporter{};
  CoherentInput input = default_coherent_input();
  std::optional<ShotRequest> shots;
  std::vector<Target> targets;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::optional<CalibrationRequest> calibration;

  /// Checks kind-specific required fields; throws one message listing
  /// everything that is missing or not applicable.
  void validate() const {
    std::vector<std::string> problems;
    auto need_epr1 = [&] {
      if (!has_epr1) problems.push_back("resources.epr1 is required for kind " + to_string(kind));
    };
    auto need_epr2 = [&] {
      if (!has_epr2) problems.push_back("resources.epr2 is required for kind " + to_string(kind));
    };
    switch (kind) {
      case ScenarioKind::coherent_teleport:
        need_epr2();
        break;
      case ScenarioKind::epr_characterize:
        need_epr1();
        if (shots) problems.push_back("shots are not supported for kind epr_characterize");
        break;
      case ScenarioKind::entanglement_swap:
        need_epr1();
        need_epr2();
        break;
      case ScenarioKind::gain_sweep:
      case ScenarioKind::squeeze_sweep:
        need_epr2();
        if (sweep_param.empty()) problems.push_back("sweep.param is required for sweep kinds");
        if (sweep_values.empty()) problems.push_back("sweep.values must be non-empty");
        break;
      case ScenarioKind::calibrate:
        if (!calibration) problems.push_back("calibrate section is required for kind calibrate");
        if (targets.empty()) problems.push_back("targets are required for kind calibrate");
        if (shots) problems.push_back("shots are not supported for kind calibrate");
        break;
    }
    if (has_epr1) epr1.validate();
    if (has_epr2) epr2.validate();
    teleporter.validate();
    if (shots && shots->count == 0) problems.push_back("shots.count must be >= 1");
    if (!problems.empty()) {
      std::string msg = "invalid scenario '" + name + "':";
      for (const auto& p : problems) msg += "\n  - " + p;
      throw std::invalid_argument(msg);
    }
  }
};

struct ReportEntry {
  std::string name;
  double linear = 0.0;
  std::optional<double> db;
  std::optional<double> db_ref;
  std::optional<double> target;     // dB when db is set, else linear
  std::optional<double> tolerance;  // same space as target
  std::optional<bool> pass;
  std::string note;
};

struct ScenarioReport {
  std::string scenario;
  std::string kind_name;
  std::optional<std::uint64_t> seed;
  std::optional<double> sweep_value;
  std::vector<ReportEntry> entries;
  std::vector<std::string> notes;
  bool all_pass = true;

  const ReportEntry* find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }
  /// Linear value of a named entry; throws if absent.
  double value(const std::string& name) const {
    const ReportEntry* e = find(name);
    if (!e) throw std::invalid_argument("report has no entry '" + name + "'");
    return e->linear;
  }
};

struct CalibrationResult {
  EprSpec fitted{};
  double jitter_rms = 0.0;
  double residual_db = 0.0;  // rms of (model dB - target dB)
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::pair<std::string, double>> model_db;  // per target
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& msg, CalibrationResult best_so_far)
      : std::runtime_error(msg), best(std::move(best_so_far)) {}
  CalibrationResult best;
};

namespace detail {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Deterministic Nelder-Mead simplex minimizer. The starting simplex is
/// x0 plus a fixed per-coordinate step, so a given (objective, x0) pair
/// always yields the same result.
template <typename F>
NelderMeadResult nelder_mead(const F& f, const Eigen::VectorXd& x0,
                             std::size_t max_iterations, double f_tol = 1e-10) {
  const auto n = x0.size();
  std::vector<Eigen::VectorXd> xs;
  xs.push_back(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = x0;
    v(i) += std::max(0.05 * std::abs(x0(i)), 0.01);
    xs.push_back(v);
  }
  std::vector<double> fs;
  fs.reserve(xs.size());
  for (const auto& v : xs) fs.push_back(f(v));

  NelderMeadResult result;
  std::size_t iter = 0;
  auto order = [&] {
    std::vector<std::size_t> idx(xs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> xs2;
    std::vector<double> fs2;
    for (auto i : idx) {
      xs2.push_back(xs[i]);
      fs2.push_back(fs[i]);
    }
    xs.swap(xs2);
    fs.swap(fs2);
  };
  order();
  while (iter < max_iterations) {
    ++iter;
    if (fs.back() - fs.front() < f_tol || fs.front() < 1e-13) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) centroid += xs[i];
    centroid /= static_cast<double>(xs.size() - 1);
    const Eigen::VectorXd reflected = centroid + (centroid - xs.back());
    const double fr = f(reflected);
    if (fr < fs.front()) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - xs.back());
      const double fe = f(expanded);
      if (fe < fr) {
        xs.back() = expanded;
        fs.back() = fe;
      } else {
        xs.back() = reflected;
        fs.back() = fr;
      }
    } else if (fr < fs[fs.size() - 2]) {
      xs.back() = reflected;
      fs.back() = fr;
    } else {
      const Eigen::VectorXd contracted = centroid + 0.5 * (xs.back() - centroid);
      const double fc = f(contracted);
      if (fc < fs.back()) {
        xs.back() = contracted;
        fs.back() = fc;
      } else {
        for (std::size_t i = 1; i < xs.size(); ++i) {
          xs[i] = xs.front() + 0.5 * (xs[i] - xs.front());
          fs[i] = f(xs[i]);
        }
      }
    }
    order();
  }
  result.x = xs.front();
  result.f = fs.front();
  result.iterations = iter;
  return result;
}

inline double* epr_param(EprSpec& spec, const std::string& name) {
  if (name == "v_sq_x") return &spec.v_sq_x;
  if (name == "v_anti_x") return &spec.v_anti_x;
  if (name == "v_sq_p") return &spec.v_sq_p;
  if (name == "v_anti_p") return &spec.v_anti_p;
  if (name == "eta_a") return &spec.eta_a;
  if (name == "eta_b") return &spec.eta_b;
  return nullptr;
}

}  // namespace detail

struct CalTarget {
  std::string name;
  double db = 0.0;
  double db_ref = kVacuumVariance;
};

/// Model prediction for one named observable, computed through the same
/// covariance machinery the scenarios use. Beam/correlation observables
/// are evaluated on the raw resource; sigma_x/sigma_p run the full
/// teleporter on a vacuum input (output variances do not depend on the
/// input displacement).
inline double observable_linear(const std::string& name, const EprSpec& spec,
                                const TeleporterConfig& cfg) {
  if (name == "sigma_x" || name == "sigma_p") {
    TeleporterConfig c = cfg;
    c.epr = spec;
    const GaussianState joint = tensor({vacuum(1), make_epr(spec)});
    const GaussianState out = teleport_exact(joint, ModeId{0}, ModeId{1}, ModeId{2}, c);
    return name == "sigma_x" ? out.var_x(ModeId{0}) : out.var_p(ModeId{0});
  }
  const GaussianState epr = make_epr(spec);
  const ModeId a{0}, b{1};
  if (name == "ref_x" || name == "beam_a_x") return epr.var_x(a);
  if (name == "ref_p" || name == "beam_a_p") return epr.var_p(a);
  if (name == "in_x" || name == "beam_b_x") return epr.var_x(b);
  if (name == "in_p" || name == "beam_b_p") return epr.var_p(b);
  if (name == "corr_x")
    return combination_variance(epr, QuadCombination::difference(Quadrature::x, a, b));
  if (name == "corr_p")
    return combination_variance(epr, QuadCombination::sum(Quadrature::p, a, b));
  throw std::invalid_argument("unknown calibration observable '" + name + "'");
}

/// Least-squares fit of resource parameters to measured dB targets.
/// The objective is the rms residual in dB space; the start point comes
/// from closed-form per-observable inversions, refined by a
/// deterministic simplex search.
inline CalibrationResult calibrate(const std::vector<CalTarget>& targets,
                                   const CalibrationRequest& request,
                                   const EprSpec& start, const TeleporterConfig& cfg) {
  if (targets.empty()) throw std::invalid_argument("calibrate: no targets given");
  std::vector<std::string> params = request.free_params;
  if (params.empty())
    throw std::invalid_argument("calibrate: no free parameters selected");
  if (targets.size() < params.size())
    throw std::invalid_argument("calibrate: under-determined (more free parameters than targets)");
  for (const auto& p : params) {
    EprSpec probe = start;
    if (p != "eta" && p != "jitter_rms" && detail::epr_param(probe, p) == nullptr)
      throw std::invalid_argument("calibrate: unknown free parameter '" + p + "'");
  }

  auto find_target = [&](const std::string& name) -> const CalTarget* {
    for (const auto& t : targets)
      if (t.name == name) return &t;
    return nullptr;
  };

  // Candidate builder: applies the parameter vector, then the model
  // constraints (pure partners, symmetric loss).
  auto build = [&](const Eigen::VectorXd& x, EprSpec& spec, TeleporterConfig& c) {
    spec = start;
    c = cfg;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double v = x(static_cast<Eigen::Index>(i));
      if (params[i] == "eta") {
        spec.eta_a = spec.eta_b = v;
      } else if (params[i] == "jitter_rms") {
        c.jitter_rms = v;
      } else {
        *detail::epr_param(spec, params[i]) = v;
      }
    }
    if (request.model != CalibrationModel::impure) {
      spec.v_anti_x = 1.0 / (16.0 * spec.v_sq_x);
      spec.v_anti_p = 1.0 / (16.0 * spec.v_sq_p);
    }
  };

  auto objective = [&](const Eigen::VectorXd& x) -> double {
    EprSpec spec;
    TeleporterConfig c;
    build(x, spec, c);
    double sum = 0.0;
    try {
      spec.validate();
      c.validate();
      for (const auto& t : targets) {
        const double lin = observable_linear(t.name, spec, c);
        const double diff = to_db(lin, t.db_ref) - t.db;
        sum += diff * diff;
      }
    } catch (const std::exception&) {
      return 1e6;  // out of the physical region
    }
    return std::sqrt(sum / static_cast<double>(targets.size()));
  };

  // Closed-form analytic start. Loss and teleported-output observables
  // invert with the current eta estimate; antisqueezing follows from the
  // beam-alone levels once v_sq is known.
  EprSpec seed = start;
  double eta0 = seed.eta_a;
  for (const auto& p : params)
    if (p == "eta") eta0 = 0.9;
  auto corr_to_vsq = [&](double corr_linear) {
    const double v = (corr_linear - (1.0 - eta0) * 0.5) / (2.0 * eta0);
    return std::max(v, 1e-4);
  };
  if (const CalTarget* t = find_target("corr_x"))
    seed.v_sq_x = corr_to_vsq(from_db(t->db, t->db_ref));
  else if (const CalTarget* t2 = find_target("sigma_x"))
    seed.v_sq_x = corr_to_vsq(from_db(t2->db, t2->db_ref) - kVacuumVariance);
  if (const CalTarget* t = find_target("corr_p"))
    seed.v_sq_p = corr_to_vsq(from_db(t->db, t->db_ref));
  else if (const CalTarget* t2 = find_target("sigma_p"))
    seed.v_sq_p = corr_to_vsq(from_db(t2->db, t2->db_ref) - kVacuumVariance);
  auto beam_to_vanti = [&](double beam_linear, double v_sq_other) {
    const double v = 2.0 * (beam_linear - (1.0 - eta0) * kVacuumVariance) / eta0 - v_sq_other;
    return std::max(v, 1e-4);
  };
  if (const CalTarget* t = find_target("ref_x"))
    seed.v_anti_p = beam_to_vanti(from_db(t->db, t->db_ref), seed.v_sq_x);
  else if (const CalTarget* t2 = find_target("in_x"))
    seed.v_anti_p = beam_to_vanti(from_db(t2->db, t2->db_ref), seed.v_sq_x);
  if (const CalTarget* t = find_target("ref_p"))
    seed.v_anti_x = beam_to_vanti(from_db(t->db, t->db_ref), seed.v_sq_p);
  else if (const CalTarget* t2 = find_target("in_p"))
    seed.v_anti_x = beam_to_vanti(from_db(t2->db, t2->db_ref), seed.v_sq_p);
  // Keep the seed inside the physical region.
  seed.v_anti_x = std::max(seed.v_anti_x, 1.0 / (16.0 * seed.v_sq_x) * (1.0 + 1e-9));
  seed.v_anti_p = std::max(seed.v_anti_p, 1.0 / (16.0 * seed.v_sq_p) * (1.0 + 1e-9));

  Eigen::VectorXd x0(static_cast<Eigen::Index>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double v = 0.0;
    if (params[i] == "eta")
      v = eta0;
    else if (params[i] == "jitter_rms")
      v = 0.01;
    else
      v = *detail::epr_param(seed, params[i]);
    x0(static_cast<Eigen::Index>(i)) = v;
  }

  const detail::NelderMeadResult nm =
      detail::nelder_mead(objective, x0, request.max_iterations);

  CalibrationResult result;
  TeleporterConfig fitted_cfg;
  build(nm.x, result.fitted, fitted_cfg);
  result.jitter_rms = fitted_cfg.jitter_rms;
  result.residual_db = nm.f;
  result.iterations = nm.iterations;
  result.converged = nm.converged;
  for (const auto& t : targets)
    result.model_db.emplace_back(
        t.name, to_db(observable_linear(t.name, result.fitted, fitted_cfg), t.db_ref));
  if (!nm.converged)
    throw CalibrationError("calibrate: no convergence within " +
                               std::to_string(request.max_iterations) +
                               " iterations (best residual " +
                               std::to_string(nm.f) + " dB)",
                           result);
  return result;
}

namespace detail {

inline void apply_target(ReportEntry& entry, const Target& t) {
  if (t.db) {
    if (!entry.db || !entry.db_ref)
      throw std::invalid_argument("target '" + t.name + "' is in dB but the quantity has no dB form");
    if (t.db_ref && std::abs(*t.db_ref - *entry.db_ref) > 1e-12)
      throw std::invalid_argument("target '" + t.name + "' uses reference level " +
                                  std::to_string(*t.db_ref) + " but the quantity is referenced to " +
                                  std::to_string(*entry.db_ref));
    entry.target = *t.db;
    entry.tolerance = t.tol_db.value_or(0.0);
    entry.pass = std::abs(*entry.db - *t.db) <= *entry.tolerance;
  } else if (t.value) {
    entry.target = *t.value;
    entry.tolerance = t.tol.value_or(0.0);
    entry.pass = std::abs(entry.linear - *t.value) <= *entry.tolerance;
  } else if (t.min || t.max) {
    const double lo = t.min.value_or(-std::numeric_limits<double>::infinity());
    const double hi = t.max.value_or(std::numeric_limits<double>::infinity());
    entry.target = (t.min && t.max) ? 0.5 * (lo + hi) : (t.min ? lo : hi);
    entry.tolerance = (t.min && t.max) ? 0.5 * (hi - lo) : 0.0;
    entry.pass = entry.linear >= lo && entry.linear <= hi;
  } else {
    throw std::invalid_argument("target '" + t.name + "' has no db/value/min/max form");
  }
}

inline void match_targets(ScenarioReport& report, const std::vector<Target>& targets) {
  for (const auto& t : targets) {
    bool found = false;
    for (auto& e : report.entries)
      if (e.name == t.name) {
        apply_target(e, t);
        found = true;
        break;
      }
    if (!found)
      throw std::invalid_argument("target '" + t.name + "' matches no report quantity");
  }
  for (const auto& e : report.entries)
    if (e.pass && !*e.pass) report.all_pass = false;
}

inline ReportEntry linear_entry(const std::string& name, double value) {
  ReportEntry e;
  e.name = name;
  e.linear = value;
  return e;
}

inline ReportEntry db_entry(const std::string& name, double value, double ref) {
  ReportEntry e;
  e.name = name;
  e.linear = value;
  e.db = to_db(value, ref);
  e.db_ref = ref;
  return e;
}

}  // namespace detail

/// Executes one scenario: exact covariance propagation always, plus a
/// Monte-Carlo section when shots are requested. Sweep kinds are run
/// point-by-point through sweep().
inline ScenarioReport run(const ExperimentScenario& scenario) {
  scenario.validate();
  ScenarioReport report;
  report.scenario = scenario.name;
  report.kind_name = to_string(scenario.kind);
  if (scenario.shots) report.seed = scenario.shots->seed;

  const bool unity_gains = scenario.teleporter.g_x == 1.0 && scenario.teleporter.g_p == 1.0;

  switch (scenario.kind) {
    case ScenarioKind::coherent_teleport: {
      TeleporterConfig cfg = scenario.teleporter;
      cfg.epr = scenario.epr2;
      const GaussianState resource =
          detail::condition_resource(make_epr(cfg.epr), ModeId{0}, ModeId{1}, cfg);
      const DuanResult ab = duan(resource, ModeId{0}, ModeId{1});
      report.entries.push_back(detail::db_entry("corr_ab_x", ab.v_x_minus, 0.5));
      report.entries.push_back(detail::db_entry("corr_ab_p", ab.v_p_plus, 0.5));
      report.entries.push_back(detail::linear_entry("duan_ab", ab.delta));

      const GaussianState in_state = coherent_state(scenario.input.x, scenario.input.p);
      const GaussianState joint = tensor({in_state, make_epr(cfg.epr)});
      const GaussianState out =
          teleport_exact(joint, ModeId{0}, ModeId{1}, ModeId{2}, cfg);
      const double sigma_x = out.var_x(ModeId{0});
      const double sigma_p = out.var_p(ModeId{0});
      report.entries.push_back(detail::db_entry("sigma_x", sigma_x, kVacuumVariance));
      report.entries.push_back(detail::db_entry("sigma_p", sigma_p, kVacuumVariance));
      const FidelityResult f = fidelity_coherent(sigma_x, sigma_p);
      ReportEntry fe = detail::linear_entry("fidelity", f.fidelity);
      if (!unity_gains) {
        fe.note = "non-unity gains: fidelity holds for the configured displacement only";
        report.notes.push_back(fe.note);
      }
      report.entries.push_back(fe);
      if (scenario.input.x != 0.0)
        report.entries.push_back(detail::linear_entry(
            "g_x", out.mean_x(ModeId{0}) / scenario.input.x));
      if (scenario.input.p != 0.0)
        report.entries.push_back(detail::linear_entry(
            "g_p", out.mean_p(ModeId{0}) / scenario.input.p));

      if (scenario.shots) {
        const MeasurementRecord rec =
            teleport_shots(joint, ModeId{0}, ModeId{1}, ModeId{2}, cfg,
                           scenario.shots->count, scenario.shots->seed);
        const double n = static_cast<double>(scenario.shots->count);
        auto mc = [&](const std::string& name, double emp, double exact, double tol3) {
          ReportEntry e = detail::linear_entry(name, emp);
          e.target = exact;
          e.tolerance = tol3;
          e.pass = std::abs(emp - exact) <= tol3;
          report.entries.push_back(e);
        };
        mc("mc_mean_x", rec.mean_x_out(), out.mean_x(ModeId{0}),
           3.0 * std::sqrt(sigma_x / n));
        mc("mc_mean_p", rec.mean_p_out(), out.mean_p(ModeId{0}),
           3.0 * std::sqrt(sigma_p / n));
        mc("mc_sigma_x", rec.var_x_out(), sigma_x, 3.0 * sigma_x * std::sqrt(2.0 / (n - 1.0)));
        mc("mc_sigma_p", rec.var_p_out(), sigma_p, 3.0 * sigma_p * std::sqrt(2.0 / (n - 1.0)));
      }
      break;
    }

    case ScenarioKind::epr_characterize: {
      const GaussianState epr = make_epr(scenario.epr1);
      const ModeId ref{0}, in{1};
      report.entries.push_back(detail::db_entry("ref_x", epr.var_x(ref), kVacuumVariance));
      report.entries.push_back(detail::db_entry("ref_p", epr.var_p(ref), kVacuumVariance));
      report.entries.push_back(detail::db_entry("in_x", epr.var_x(in), kVacuumVariance));
      report.entries.push_back(detail::db_entry("in_p", epr.var_p(in), kVacuumVariance));
      const DuanResult d = duan(epr, ref, in);
      report.entries.push_back(detail::db_entry("corr_x", d.v_x_minus, 0.5));
      report.entries.push_back(detail::db_entry("corr_p", d.v_p_plus, 0.5));
      report.entries.push_back(detail::linear_entry("duan_ref_in", d.delta));
      report.entries.push_back(detail::linear_entry("below_half", d.below_half ? 1.0 : 0.0));
      break;
    }

    case ScenarioKind::entanglement_swap: {
      TeleporterConfig cfg = scenario.teleporter;
      cfg.epr = scenario.epr2;
      const DuanResult d_in = duan(make_epr(scenario.epr1), ModeId{0}, ModeId{1});
      const GaussianState resource =
          detail::condition_resource(make_epr(cfg.epr), ModeId{0}, ModeId{1}, cfg);
      const DuanResult d_ab = duan(resource, ModeId{0}, ModeId{1});
      report.entries.push_back(detail::linear_entry("duan_ref_in", d_in.delta));
      report.entries.push_back(detail::linear_entry("duan_ab", d_ab.delta));

      const GaussianState swapped = swap_scenario(scenario.epr1, cfg.epr, cfg);
      const ModeId ref{0}, out{1};
      report.entries.push_back(detail::db_entry("out_x", swapped.var_x(out), kVacuumVariance));
      report.entries.push_back(detail::db_entry("out_p", swapped.var_p(out), kVacuumVariance));
      const DuanResult d_out = duan(swapped, ref, out);
      report.entries.push_back(detail::db_entry("corr_x", d_out.v_x_minus, 0.5));
      report.entries.push_back(detail::db_entry("corr_p", d_out.v_p_plus, 0.5));
      report.entries.push_back(detail::linear_entry("duan_ref_out", d_out.delta));
      report.entries.push_back(detail::linear_entry("entangled", d_out.entangled ? 1.0 : 0.0));
      // At unity gain with independent resources the output criterion is
      // exactly additive; the gap entry makes any deviation visible.
      report.entries.push_back(detail::linear_entry(
          "additivity_gap", d_out.delta - (d_in.delta + d_ab.delta)));
      if (!unity_gains)
        report.notes.push_back("non-unity gains: additivity of the Duan values does not apply");

      if (scenario.shots) {
        const GaussianState joint = tensor({make_epr(scenario.epr1), make_epr(cfg.epr)});
        const MeasurementRecord rec =
            teleport_shots(joint, ModeId{1}, ModeId{2}, ModeId{3}, cfg,
                           scenario.shots->count, scenario.shots->seed);
        const double n = static_cast<double>(scenario.shots->count);
        const double vx = swapped.var_x(out), vp = swapped.var_p(out);
        ReportEntry ex = detail::linear_entry("mc_out_x", rec.var_x_out());
        ex.target = vx;
        ex.tolerance = 3.0 * vx * std::sqrt(2.0 / (n - 1.0));
        ex.pass = std::abs(ex.linear - vx) <= *ex.tolerance;
        report.entries.push_back(ex);
        ReportEntry ep = detail::linear_entry("mc_out_p", rec.var_p_out());
        ep.target = vp;
        ep.tolerance = 3.0 * vp * std::sqrt(2.0 / (n - 1.0));
        ep.pass = std::abs(ep.linear - vp) <= *ep.tolerance;
        report.entries.push_back(ep);
      }
      break;
    }

    case ScenarioKind::calibrate: {
      std::vector<CalTarget> cal_targets;
      for (const auto& t : scenario.targets) {
        if (!t.db || !t.db_ref) continue;  // only dB targets are fitted
        cal_targets.push_back({t.name, *t.db, *t.db_ref});
      }
      const EprSpec& start =
          scenario.calibration->resource == "epr2" ? scenario.epr2 : scenario.epr1;
      const CalibrationResult cal =
          calibrate(cal_targets, *scenario.calibration, start, scenario.teleporter);
      report.entries.push_back(detail::linear_entry("residual_db", cal.residual_db));
      report.entries.push_back(detail::linear_entry("iterations",
                                                    static_cast<double>(cal.iterations)));
      report.entries.push_back(detail::linear_entry("v_sq_x", cal.fitted.v_sq_x));
      report.entries.push_back(detail::linear_entry("v_anti_x", cal.fitted.v_anti_x));
      report.entries.push_back(detail::linear_entry("v_sq_p", cal.fitted.v_sq_p));
      report.entries.push_back(detail::linear_entry("v_anti_p", cal.fitted.v_anti_p));
      report.entries.push_back(detail::linear_entry("eta_a", cal.fitted.eta_a));
      report.entries.push_back(detail::linear_entry("eta_b", cal.fitted.eta_b));
      for (const auto& [name, db] : cal.model_db) {
        ReportEntry e;
        e.name = "model_" + name;
        e.db = db;
        for (const auto& t : cal_targets)
          if (t.name == name) {
            e.db_ref = t.db_ref;
            e.linear = from_db(db, t.db_ref);
          }
        report.entries.push_back(e);
      }
      if (scenario.calibration->max_residual_db) {
        ReportEntry& res = report.entries.front();
        res.target = 0.0;
        res.tolerance = *scenario.calibration->max_residual_db;
        res.pass = cal.residual_db <= *scenario.calibration->max_residual_db;
        if (!*res.pass) report.all_pass = false;
      }
      break;
    }

    case ScenarioKind::gain_sweep:
    case ScenarioKind::squeeze_sweep:
      throw std::invalid_argument("scenario '" + scenario.name +
                                  "' is a sweep; run it through the sweep operation");
  }

  detail::match_targets(report, scenario.kind == ScenarioKind::calibrate
                                    ? std::vector<Target>{}
                                    : scenario.targets);

  // Flag quantities whose model value sits measurably away from the
  // benchmark target even when inside the acceptance window.
  for (const auto& e : report.entries)
    if (e.pass && *e.pass && e.db && e.target &&
        std::abs(*e.db - *e.target) > 0.1 && e.tolerance && *e.tolerance > 0.2)
      report.notes.push_back("model-vs-target gap on " + e.name + ": model " +
                             std::to_string(*e.db) + " dB vs target " +
                             std::to_string(*e.target) + " dB");
  return report;
}

namespace detail {

inline void set_param_path(ExperimentScenario& s, const std::string& path, double value) {
  auto epr_path = [&](EprSpec& spec, bool& has, const std::string& field) -> bool {
    if (field == "duan_symmetric") {
      spec = EprSpec::from_duan_symmetric(value);
      has = true;
      return true;
    }
    if (double* p = epr_param(spec, field)) {
      *p = value;
      has = true;
      return true;
    }
    return false;
  };
  if (path == "teleporter.g") {
    s.teleporter.g_x = s.teleporter.g_p = value;
    return;
  }
  if (path == "teleporter.g_x") { s.teleporter.g_x = value; return; }
  if (path == "teleporter.g_p") { s.teleporter.g_p = value; return; }
  if (path == "teleporter.jitter_rms") { s.teleporter.jitter_rms = value; return; }
  if (path == "teleporter.eta_combiner") { s.teleporter.eta_combiner = value; return; }
  if (path == "input.x") { s.input.x = value; return; }
  if (path == "input.p") { s.input.p = value; return; }
  if (path.rfind("epr1.", 0) == 0 && epr_path(s.epr1, s.has_epr1, path.substr(5))) return;
  if (path.rfind("epr2.", 0) == 0 && epr_path(s.epr2, s.has_epr2, path.substr(5))) return;
  throw std::invalid_argument("unknown sweep parameter path '" + path + "'");
}

}  // namespace detail

/// Runs `base` once per value of the swept parameter; report order
/// follows the value list. Sweep kinds execute as coherent teleportation
/// scenarios at each point.
inline std::vector<ScenarioReport> sweep(const ExperimentScenario& base,
                                         const std::string& param,
                                         const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep: empty value list");
  std::vector<ScenarioReport> reports;
  reports.reserve(values.size());
  for (double v : values) {
    ExperimentScenario point = base;
    if (point.kind == ScenarioKind::gain_sweep || point.kind == ScenarioKind::squeeze_sweep)
      point.kind = ScenarioKind::coherent_teleport;
    detail::set_param_path(point, param, v);
    point.sweep_param.clear();
    point.sweep_values.clear();
    ScenarioReport r = run(point);
    r.sweep_value = v;
    reports.push_back(std::move(r));
  }
  return reports;
}

/// Convenience overload for scenarios that carry their sweep section.
inline std::vector<ScenarioReport> sweep(const ExperimentScenario& base) {
  base.validate();
  return sweep(base, base.sweep_param, base.sweep_values);
}

}  // namespace cvt
