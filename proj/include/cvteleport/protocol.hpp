// The teleportation protocol: EPR resource generation, the Bell
// measurement / feedforward / displacement chain in exact
// covariance-propagation mode and in Monte-Carlo shot mode, and the
// entanglement-swapping composition.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "cvteleport/gaussian.hpp"

namespace cvt {

/// Parameters of one EPR resource: the two squeezed-vacuum inputs
/// (squeezed/antisqueezed variances of the x-squeezed and the
/// p-squeezed OPO) and a transmissivity per output beam.
struct EprSpec {
  double v_sq_x = kVacuumVariance;
  double v_anti_x = kVacuumVariance;
  double v_sq_p = kVacuumVariance;
  double v_anti_p = kVacuumVariance;
  double eta_a = 1.0;
  double eta_b = 1.0;

  /// Minimum-uncertainty squeezers: v_anti = 1/(16 v_sq).
  static EprSpec pure(double v_sq_x, double v_sq_p) {
    EprSpec s;
    s.v_sq_x = v_sq_x;
    s.v_anti_x = 1.0 / (16.0 * v_sq_x);
    s.v_sq_p = v_sq_p;
    s.v_anti_p = 1.0 / (16.0 * v_sq_p);
    return s;
  }

  /// Symmetric pure resource with a prescribed Duan value:
  /// Delta = 2(v_sq_x + v_sq_p) = 4 v_sq, so v_sq = delta/4.
  static EprSpec from_duan_symmetric(double delta) {
    if (!(delta > 0.0))
      throw std::invalid_argument("EprSpec::from_duan_symmetric: delta must be > 0");
    return pure(delta / 4.0, delta / 4.0);
  }

  /// Both inputs vacuum: the separability boundary (Delta = 1).
  static EprSpec vacuum_pair() { return EprSpec{}; }

  void validate() const {
    if (!(v_sq_x > 0.0) || !(v_anti_x > 0.0) || !(v_sq_p > 0.0) || !(v_anti_p > 0.0))
      throw std::invalid_argument("EprSpec: variances must be positive");
    if (v_sq_x * v_anti_x < kUncertaintyProductMin - 1e-12 ||
        v_sq_p * v_anti_p < kUncertaintyProductMin - 1e-12)
      throw std::domain_error("EprSpec: uncertainty product below 1/16");
    if (!(eta_a >= 0.0 && eta_a <= 1.0) || !(eta_b >= 0.0 && eta_b <= 1.0))
      throw std::invalid_argument("EprSpec: eta must be in [0, 1]");
  }
};

/// Full teleporter description: the EPR resource, per-quadrature
/// classical gains, an rms phase jitter applied to both resource beams,
/// and the transmissivity of the displacement combiner on mode B.
struct TeleporterConfig {
  EprSpec epr{};
  double g_x = 1.0;
  double g_p = 1.0;
  double jitter_rms = 0.0;
  double eta_combiner = 1.0;

  void validate() const {
    if (!std::isfinite(g_x) || !std::isfinite(g_p))
      throw std::invalid_argument("TeleporterConfig: gains must be finite");
    if (!(jitter_rms >= 0.0))
      throw std::invalid_argument("TeleporterConfig: jitter_rms must be >= 0");
    if (!(eta_combiner >= 0.0 && eta_combiner <= 1.0))
      throw std::invalid_argument("TeleporterConfig: eta_combiner must be in [0, 1]");
  }
};

/// Builds one EPR pair by interfering a p-squeezed mode (port 1) and an
/// x-squeezed mode (port 2) on the balanced splitter, then applying the
/// per-beam losses. With outputs A = (1+2)/sqrt(2), B = (1-2)/sqrt(2):
///   x_A - x_B = sqrt(2) x_2  ->  variance 2 v_sq_x,
///   p_A + p_B = sqrt(2) p_1  ->  variance 2 v_sq_p.
/// Returns the 2-mode state (A = mode 0, B = mode 1).
inline GaussianState make_epr(const EprSpec& spec) {
  spec.validate();
  const GaussianState p_squeezed =
      squeezed_vacuum(spec.v_sq_p, spec.v_anti_p, std::numbers::pi / 2.0);
  const GaussianState x_squeezed = squeezed_vacuum(spec.v_sq_x, spec.v_anti_x, 0.0);
  GaussianState out = apply_symplectic(tensor({p_squeezed, x_squeezed}),
                                       SymplecticOp::balanced_beam_splitter(),
                                       {ModeId{0}, ModeId{1}});
  out = loss_channel(out, ModeId{0}, spec.eta_a);
  out = loss_channel(out, ModeId{1}, spec.eta_b);
  return out;
}

namespace detail {

/// Resource conditioning shared by both teleport modes: phase jitter on
/// both resource beams, then the displacement-combiner loss on mode B.
/// The combiner loss acts before the displacement is added, matching a
/// highly reflecting mirror that attenuates B while admitting the
/// modulated beam.
inline GaussianState condition_resource(const GaussianState& joint, ModeId a, ModeId b,
                                        const TeleporterConfig& cfg) {
  GaussianState state = joint;
  if (cfg.jitter_rms > 0.0) {
    state = phase_jitter(state, a, cfg.jitter_rms);
    state = phase_jitter(state, b, cfg.jitter_rms);
  }
  if (cfg.eta_combiner < 1.0) state = loss_channel(state, b, cfg.eta_combiner);
  return state;
}

inline void check_teleport_modes(const GaussianState& joint, ModeId in, ModeId a,
                                 ModeId b) {
  joint.check_mode(in);
  joint.check_mode(a);
  joint.check_mode(b);
  if (in == a || in == b || a == b)
    throw std::invalid_argument("teleport: input, A and B modes must be distinct");
}

inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based per-shot stream seed: shot i gets an independent
/// generator, so records are identical however the loop is scheduled.
inline std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t shot) {
  std::uint64_t s = seed ^ (0xd1342543de82ef95ULL * (shot + 1));
  splitmix64(s);
  return splitmix64(s);
}

/// Cholesky factor of a 2x2 covariance, tolerant of semidefinite input
/// (deterministic outcomes get a zero row).
inline Eigen::Matrix2d chol2(const Eigen::Matrix2d& c) {
  Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
  l(0, 0) = std::sqrt(std::max(c(0, 0), 0.0));
  l(1, 0) = l(0, 0) > 0.0 ? c(1, 0) / l(0, 0) : 0.0;
  l(1, 1) = std::sqrt(std::max(c(1, 1) - l(1, 0) * l(1, 0), 0.0));
  return l;
}

}  // namespace detail

/// Teleports mode `in` onto mode `b` using the entangled pair (a, b).
///
/// The Bell measurement yields x_u = (x_in - x_A)/sqrt(2) and
/// p_v = (p_in + p_A)/sqrt(2); Bob then displaces
/// x_B -> x_B + sqrt(2) g_x x_u, p_B -> p_B + sqrt(2) g_p p_v. Because
/// the displacement is linear in the measured values, the unconditional
/// output moments follow from the deterministic quadrature map
///   x_out = g_x x_in + x_B - g_x x_A,
///   p_out = g_p p_in + p_B + g_p p_A
/// with no sampling or conditioning: writing Bob's mode before the
/// measurement as x_B = x_in - (x_A - x_B) - sqrt(2) x_u shows the
/// measured terms cancel exactly once the feedforward is added. At
/// unity gain this reduces to x_out = x_in - (x_A - x_B),
/// p_out = p_in + (p_A + p_B).
///
/// The input and A modes are consumed by the homodyne detection and
/// removed; the output replaces B's slot. Spectator modes and their
/// correlations with the output are propagated exactly.
inline GaussianState teleport_exact(const GaussianState& joint, ModeId in, ModeId a,
                                    ModeId b, const TeleporterConfig& cfg) {
  detail::check_teleport_modes(joint, in, a, b);
  cfg.validate();
  const GaussianState state = detail::condition_resource(joint, a, b, cfg);
  const std::size_t n = state.num_modes();
  const auto dim_out = static_cast<Eigen::Index>(2 * (n - 2));
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(dim_out, static_cast<Eigen::Index>(2 * n));
  Eigen::Index row = 0;
  for (std::size_t m = 0; m < n; ++m) {
    if (m == in.value || m == a.value) continue;
    if (m == b.value) {
      t(row, static_cast<Eigen::Index>(x_index(in))) = cfg.g_x;
      t(row, static_cast<Eigen::Index>(x_index(a))) = -cfg.g_x;
      t(row, static_cast<Eigen::Index>(x_index(b))) = 1.0;
      t(row + 1, static_cast<Eigen::Index>(p_index(in))) = cfg.g_p;
      t(row + 1, static_cast<Eigen::Index>(p_index(a))) = cfg.g_p;
      t(row + 1, static_cast<Eigen::Index>(p_index(b))) = 1.0;
    } else {
      t(row, static_cast<Eigen::Index>(2 * m)) = 1.0;
      t(row + 1, static_cast<Eigen::Index>(2 * m + 1)) = 1.0;
    }
    row += 2;
  }
  return GaussianState(t * state.mean(), t * state.cov() * t.transpose());
}

struct BellOutcome {
  double x_u = 0.0;
  double p_v = 0.0;
};

struct Shot {
  BellOutcome bell;
  double x_out = 0.0;
  double p_out = 0.0;
};

/// Per-shot Bell outcomes and output quadrature samples. Reproducible:
/// the same (scenario, seed) yields an identical record.
struct MeasurementRecord {
  std::vector<Shot> shots;
  std::uint64_t seed = 0;

  double mean_x_out() const {
    double s = 0.0;
    for (const auto& h : shots) s += h.x_out;
    return s / static_cast<double>(shots.size());
  }
  double mean_p_out() const {
    double s = 0.0;
    for (const auto& h : shots) s += h.p_out;
    return s / static_cast<double>(shots.size());
  }
  double var_x_out() const {
    const double m = mean_x_out();
    double s = 0.0;
    for (const auto& h : shots) s += (h.x_out - m) * (h.x_out - m);
    return s / static_cast<double>(shots.size() - 1);
  }
  double var_p_out() const {
    const double m = mean_p_out();
    double s = 0.0;
    for (const auto& h : shots) s += (h.p_out - m) * (h.p_out - m);
    return s / static_cast<double>(shots.size() - 1);
  }
};

/// Monte-Carlo teleportation: per shot, draws (x_u, p_v) from their
/// joint Gaussian marginal, then the pre-displacement output
/// quadratures from the conditional Gaussian given those outcomes, then
/// adds the sqrt(2) g feedforward displacement. Empirical moments
/// converge to the teleport_exact result.
inline MeasurementRecord teleport_shots(const GaussianState& joint, ModeId in, ModeId a,
                                        ModeId b, const TeleporterConfig& cfg,
                                        std::size_t n_shots, std::uint64_t seed) {
  detail::check_teleport_modes(joint, in, a, b);
  cfg.validate();
  if (n_shots == 0) throw std::invalid_argument("teleport_shots: n_shots must be >= 1");
  const GaussianState state = detail::condition_resource(joint, a, b, cfg);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

  // Joint Gaussian of (x_u, p_v, x_B, p_B).
  Eigen::MatrixXd l =
      Eigen::MatrixXd::Zero(4, static_cast<Eigen::Index>(2 * state.num_modes()));
  l(0, static_cast<Eigen::Index>(x_index(in))) = inv_sqrt2;
  l(0, static_cast<Eigen::Index>(x_index(a))) = -inv_sqrt2;
  l(1, static_cast<Eigen::Index>(p_index(in))) = inv_sqrt2;
  l(1, static_cast<Eigen::Index>(p_index(a))) = inv_sqrt2;
  l(2, static_cast<Eigen::Index>(x_index(b))) = 1.0;
  l(3, static_cast<Eigen::Index>(p_index(b))) = 1.0;
  const Eigen::Vector4d mu = l * state.mean();
  const Eigen::Matrix4d c = l * state.cov() * l.transpose();

  const Eigen::Matrix2d c_uu = c.topLeftCorner<2, 2>();
  const Eigen::Matrix2d c_bu = c.bottomLeftCorner<2, 2>();
  const Eigen::Matrix2d gain = c_bu * c_uu.inverse();  // regression of B on (u, v)
  const Eigen::Matrix2d l_u = detail::chol2(c_uu);
  const Eigen::Matrix2d l_cond =
      detail::chol2(c.bottomRightCorner<2, 2>() - gain * c_bu.transpose());

  MeasurementRecord rec;
  rec.seed = seed;
  rec.shots.resize(n_shots);
  for (std::size_t i = 0; i < n_shots; ++i) {
    std::mt19937_64 eng(detail::shot_seed(seed, i));
    std::normal_distribution<double> normal;
    Eigen::Vector2d z1(normal(eng), normal(eng));
    Eigen::Vector2d z2(normal(eng), normal(eng));
    const Eigen::Vector2d outcome = mu.head<2>() + l_u * z1;
    const Eigen::Vector2d bob =
        mu.tail<2>() + gain * (outcome - mu.head<2>()) + l_cond * z2;
    Shot& s = rec.shots[i];
    s.bell = {outcome(0), outcome(1)};
    s.x_out = bob(0) + std::numbers::sqrt2 * cfg.g_x * outcome(0);
    s.p_out = bob(1) + std::numbers::sqrt2 * cfg.g_p * outcome(1);
  }
  return rec;
}

/// Entanglement swapping: one beam of EPR1 is kept as a reference, the
/// other is teleported through a teleporter built on EPR2. Returns the
/// joint (ref, out) state for entanglement verification.
inline GaussianState swap_scenario(const EprSpec& epr1, const EprSpec& epr2,
                                   const TeleporterConfig& cfg) {
  const GaussianState joint = tensor({make_epr(epr1), make_epr(epr2)});
  // Modes: ref = 0, in = 1, A = 2, B = 3.
  return teleport_exact(joint, ModeId{1}, ModeId{2}, ModeId{3}, cfg);
}

}  // namespace cvt
