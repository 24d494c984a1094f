// Multimode Gaussian states and linear-optical transformations.
//
// Conventions used throughout the library:
//   * hbar = 1/2, so [x, p] = i/2 and every vacuum quadrature has
//     variance 1/4.
//   * Quadratures are ordered (x_1, p_1, ..., x_N, p_N).
//   * The symplectic form Omega is block diagonal in 2x2 blocks
//     [[0, 1], [-1, 0]].
//   * The balanced beam splitter maps (a, b) -> ((a+b)/sqrt(2),
//     (a-b)/sqrt(2)). EPR correlations (x-x vs x+x) depend on this
//     sign choice, so it is fixed here once and for all.
//
// States are immutable values: every operation returns a new state and
// is safe to call concurrently.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvt {

inline constexpr double kVacuumVariance = 0.25;

// Tolerances: exact linear-algebra identities hold to 1e-10 in double
// precision on the <=10 mode systems this library targets; eigenvalue
// positivity gets an extra decade of slack.
inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kSymplecticTol = 1e-10;
inline constexpr double kPhysicalityTol = 1e-9;
inline constexpr double kUncertaintyProductMin = 1.0 / 16.0;

/// Index of one optical mode within a state. Range-checked at every
/// operation boundary.
struct ModeId {
  std::size_t value = 0;
  friend bool operator==(ModeId a, ModeId b) { return a.value == b.value; }
};

enum class Quadrature { x, p };

inline std::size_t x_index(ModeId m) { return 2 * m.value; }
inline std::size_t p_index(ModeId m) { return 2 * m.value + 1; }
inline std::size_t quad_index(ModeId m, Quadrature q) {
  return q == Quadrature::x ? x_index(m) : p_index(m);
}

/// The standard symplectic form for n modes.
inline Eigen::MatrixXd symplectic_form(std::size_t n_modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

inline bool is_symplectic(const Eigen::MatrixXd& s, double tol = kSymplecticTol) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0 || s.rows() == 0) return false;
  const Eigen::MatrixXd omega = symplectic_form(static_cast<std::size_t>(s.rows()) / 2);
  return ((s.transpose() * omega * s - omega).cwiseAbs().maxCoeff() <= tol);
}

/// A Gaussian state of N modes: mean quadrature vector (length 2N) and
/// symmetric covariance matrix (2N x 2N). The covariance matrix is the
/// single source of truth for all noise properties.
class GaussianState {
 public:
  GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov)
      : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() == 0 || mean_.size() % 2 != 0)
      throw std::invalid_argument("GaussianState: mean length must be positive and even");
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
      throw std::invalid_argument("GaussianState: covariance shape does not match mean");
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
      throw std::invalid_argument("GaussianState: covariance is not symmetric");
    // Kill symmetric roundoff so downstream exact identities stay clean.
    cov_ = ((cov_ + cov_.transpose()) / 2.0).eval();
  }

  std::size_t num_modes() const { return static_cast<std::size_t>(mean_.size()) / 2; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

  void check_mode(ModeId m) const {
    if (m.value >= num_modes())
      throw std::invalid_argument("mode index " + std::to_string(m.value) +
                                  " out of range for " + std::to_string(num_modes()) +
                                  "-mode state");
  }

  double mean_x(ModeId m) const { check_mode(m); return mean_(x_index(m)); }
  double mean_p(ModeId m) const { check_mode(m); return mean_(p_index(m)); }
  double var_x(ModeId m) const { check_mode(m); return cov_(x_index(m), x_index(m)); }
  double var_p(ModeId m) const { check_mode(m); return cov_(p_index(m), p_index(m)); }

  Eigen::Vector2d mode_mean(ModeId m) const {
    check_mode(m);
    return mean_.segment<2>(2 * m.value);
  }
  Eigen::Matrix2d mode_cov(ModeId m) const {
    check_mode(m);
    return cov_.block<2, 2>(2 * m.value, 2 * m.value);
  }

  /// Smallest symplectic eigenvalue of the covariance matrix. Physical
  /// states have every symplectic eigenvalue >= 1/4.
  double min_symplectic_eigenvalue() const {
    const Eigen::MatrixXd m = symplectic_form(num_modes()) * cov_;
    const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues();
    return eig.cwiseAbs().minCoeff();
  }

  bool is_physical(double tol = kPhysicalityTol) const {
    return min_symplectic_eigenvalue() >= kVacuumVariance - tol;
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

enum class SymplecticKind { beamsplitter, rotation, squeezer, custom };

/// A linear quadrature map S acting on M designated modes, with
/// S^T Omega S = Omega enforced at construction.
class SymplecticOp {
 public:
  /// Two-mode splitter: out1 = sqrt(t) a + sqrt(1-t) b,
  /// out2 = sqrt(1-t) a - sqrt(t) b.
  static SymplecticOp beam_splitter(double transmissivity) {
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
      throw std::invalid_argument("beam_splitter: transmissivity must be in [0, 1]");
    const double ct = std::sqrt(transmissivity);
    const double st = std::sqrt(1.0 - transmissivity);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(4, 4);
    for (int q = 0; q < 2; ++q) {
      s(q, q) = ct;
      s(q, 2 + q) = st;
      s(2 + q, q) = st;
      s(2 + q, 2 + q) = -ct;
    }
    return SymplecticOp(std::move(s), SymplecticKind::beamsplitter);
  }

  static SymplecticOp balanced_beam_splitter() { return beam_splitter(0.5); }

  /// Single-mode phase-space rotation by theta.
  static SymplecticOp rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::MatrixXd m(2, 2);
    m << c, -s, s, c;
    return SymplecticOp(std::move(m), SymplecticKind::rotation);
  }

  /// Single-mode squeezer: x -> e^{-r} x, p -> e^{r} p.
  static SymplecticOp squeezer(double r) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 0) = std::exp(-r);
    m(1, 1) = std::exp(r);
    return SymplecticOp(std::move(m), SymplecticKind::squeezer);
  }

  static SymplecticOp custom(Eigen::MatrixXd matrix) {
    return SymplecticOp(std::move(matrix), SymplecticKind::custom);
  }

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  SymplecticKind kind() const { return kind_; }
  std::size_t num_modes() const { return static_cast<std::size_t>(matrix_.rows()) / 2; }

 private:
  SymplecticOp(Eigen::MatrixXd matrix, SymplecticKind kind)
      : matrix_(std::move(matrix)), kind_(kind) {
    if (!is_symplectic(matrix_))
      throw std::domain_error("SymplecticOp: matrix is not symplectic (S^T Omega S != Omega)");
  }

  Eigen::MatrixXd matrix_;
  SymplecticKind kind_;
};

struct QuadTerm {
  ModeId mode;
  Quadrature quad = Quadrature::x;
  double weight = 0.0;
};

/// A linear combination of quadrature operators, e.g. x_A - x_B.
class QuadCombination {
 public:
  explicit QuadCombination(std::vector<QuadTerm> terms) : terms_(std::move(terms)) {
    bool any = false;
    for (const auto& t : terms_) any = any || t.weight != 0.0;
    if (!any)
      throw std::invalid_argument("QuadCombination: needs at least one nonzero weight");
  }

  static QuadCombination difference(Quadrature q, ModeId i, ModeId j) {
    return QuadCombination({{i, q, 1.0}, {j, q, -1.0}});
  }
  static QuadCombination sum(Quadrature q, ModeId i, ModeId j) {
    return QuadCombination({{i, q, 1.0}, {j, q, 1.0}});
  }

  const std::vector<QuadTerm>& terms() const { return terms_; }

  Eigen::VectorXd coefficient_vector(std::size_t n_modes) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * n_modes);
    for (const auto& t : terms_) {
      if (t.mode.value >= n_modes)
        throw std::invalid_argument("QuadCombination: mode index out of range");
      c(quad_index(t.mode, t.quad)) += t.weight;
    }
    return c;
  }

 private:
  std::vector<QuadTerm> terms_;
};

inline GaussianState vacuum(std::size_t n_modes) {
  if (n_modes == 0) throw std::invalid_argument("vacuum: n_modes must be >= 1");
  return GaussianState(Eigen::VectorXd::Zero(2 * n_modes),
                       kVacuumVariance *
                           Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes));
}

/// Single-mode squeezed vacuum with variances {v_sq, v_anti} and the
/// squeezed (minor) axis at `angle` from the x axis. Impure states
/// (v_sq * v_anti > 1/16) are allowed; they model OPO excess noise.
inline GaussianState squeezed_vacuum(double v_sq, double v_anti, double angle) {
  if (!(v_sq > 0.0) || !(v_anti > 0.0))
    throw std::invalid_argument("squeezed_vacuum: variances must be positive");
  if (v_sq * v_anti < kUncertaintyProductMin - 1e-12)
    throw std::domain_error("squeezed_vacuum: v_sq * v_anti < 1/16 violates the uncertainty relation");
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::MatrixXd cov(2, 2);
  // R(angle) diag(v_sq, v_anti) R(angle)^T, written out so that the
  // rotation-invariant case v_sq == v_anti stays exactly diagonal.
  cov(0, 0) = c * c * v_sq + s * s * v_anti;
  cov(1, 1) = s * s * v_sq + c * c * v_anti;
  cov(0, 1) = cov(1, 0) = c * s * (v_sq - v_anti);
  return GaussianState(Eigen::VectorXd::Zero(2), std::move(cov));
}

/// Coherent state: displaced vacuum with mean (mean_x, mean_p).
inline GaussianState coherent_state(double mean_x, double mean_p) {
  Eigen::VectorXd mean(2);
  mean << mean_x, mean_p;
  return GaussianState(std::move(mean),
                       kVacuumVariance * Eigen::MatrixXd::Identity(2, 2));
}

inline GaussianState tensor(const std::vector<GaussianState>& parts) {
  if (parts.empty()) throw std::invalid_argument("tensor: empty state list");
  std::size_t n = 0;
  for (const auto& s : parts) n += s.num_modes();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2 * n);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  std::size_t at = 0;
  for (const auto& s : parts) {
    const auto d = static_cast<Eigen::Index>(2 * s.num_modes());
    mean.segment(at, d) = s.mean();
    cov.block(at, at, d, d) = s.cov();
    at += d;
  }
  return GaussianState(std::move(mean), std::move(cov));
}

/// Marginal state of the listed modes, in the listed order.
inline GaussianState partial_trace(const GaussianState& state,
                                   const std::vector<ModeId>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep list");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    state.check_mode(keep[i]);
    for (std::size_t j = i + 1; j < keep.size(); ++j)
      if (keep[i] == keep[j])
        throw std::invalid_argument("partial_trace: duplicate mode in keep list");
  }
  const std::size_t n = keep.size();
  Eigen::VectorXd mean(2 * n);
  Eigen::MatrixXd cov(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    mean.segment<2>(2 * i) = state.mean().segment<2>(2 * keep[i].value);
    for (std::size_t j = 0; j < n; ++j)
      cov.block<2, 2>(2 * i, 2 * j) =
          state.cov().block<2, 2>(2 * keep[i].value, 2 * keep[j].value);
  }
  return GaussianState(std::move(mean), std::move(cov));
}

inline GaussianState displaced(const GaussianState& state, ModeId mode, double dx,
                               double dp) {
  state.check_mode(mode);
  Eigen::VectorXd mean = state.mean();
  mean(x_index(mode)) += dx;
  mean(p_index(mode)) += dp;
  return GaussianState(std::move(mean), state.cov());
}

/// Applies a symplectic map to the designated modes: mean -> S mean,
/// cov -> S cov S^T on the embedded subspace; other modes untouched.
inline GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op,
                                      const std::vector<ModeId>& modes) {
  if (modes.size() != op.num_modes())
    throw std::invalid_argument("apply_symplectic: op acts on " +
                                std::to_string(op.num_modes()) + " modes, got " +
                                std::to_string(modes.size()));
  for (std::size_t i = 0; i < modes.size(); ++i) {
    state.check_mode(modes[i]);
    for (std::size_t j = i + 1; j < modes.size(); ++j)
      if (modes[i] == modes[j])
        throw std::invalid_argument("apply_symplectic: modes must be distinct");
  }
  const std::size_t n = state.num_modes();
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    s.row(2 * modes[i].value).setZero();
    s.row(2 * modes[i].value + 1).setZero();
  }
  const auto& m = op.matrix();
  for (std::size_t i = 0; i < 2 * modes.size(); ++i)
    for (std::size_t j = 0; j < 2 * modes.size(); ++j)
      s(2 * modes[i / 2].value + i % 2, 2 * modes[j / 2].value + j % 2) =
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return GaussianState(s * state.mean(), s * state.cov() * s.transpose());
}

/// Pure loss on one mode: mixes it with vacuum at transmissivity eta.
/// Per quadrature: mean -> sqrt(eta) mean, V -> eta V + (1-eta)/4,
/// cross covariances scale by sqrt(eta).
inline GaussianState loss_channel(const GaussianState& state, ModeId mode, double eta) {
  state.check_mode(mode);
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("loss_channel: eta must be in [0, 1]");
  if (eta == 1.0) return state;
  const double root = std::sqrt(eta);
  const auto k = static_cast<Eigen::Index>(2 * mode.value);
  const auto d = state.mean().size();
  Eigen::VectorXd mean = state.mean();
  Eigen::MatrixXd cov = state.cov();
  mean.segment<2>(k) *= root;
  cov.block(k, 0, 2, d) *= root;
  cov.block(0, k, d, 2) *= root;
  // The own block has now picked up eta = root^2; add the vacuum part.
  cov.block<2, 2>(k, k) += (1.0 - eta) * kVacuumVariance * Eigen::Matrix2d::Identity();
  return GaussianState(std::move(mean), std::move(cov));
}

/// Gaussian-averaged random phase rotation of one mode, angle
/// theta ~ N(0, rms_theta^2). Computed in closed form from the exact
/// moments E[cos theta] = e^{-s^2/2} and E[cos 2theta] = e^{-2s^2};
/// the covariance includes the spread of the randomly rotated mean, so
/// the result carries the exact first and second moments of the
/// averaged state.
inline GaussianState phase_jitter(const GaussianState& state, ModeId mode,
                                  double rms_theta) {
  state.check_mode(mode);
  if (!(rms_theta >= 0.0))
    throw std::invalid_argument("phase_jitter: rms_theta must be >= 0");
  if (rms_theta == 0.0) return state;
  const double c1 = std::exp(-rms_theta * rms_theta / 2.0);
  const double c2 = std::exp(-2.0 * rms_theta * rms_theta);
  const auto k = static_cast<Eigen::Index>(2 * mode.value);
  const auto d = state.mean().size();
  Eigen::VectorXd mean = state.mean();
  Eigen::MatrixXd cov = state.cov();
  const Eigen::Vector2d mu = mean.segment<2>(k);
  const Eigen::Matrix2d a = cov.block<2, 2>(k, k) + mu * mu.transpose();
  Eigen::Matrix2d jaj;  // J A J^T for J = [[0,-1],[1,0]]
  jaj << a(1, 1), -a(1, 0), -a(0, 1), a(0, 0);
  cov.block(k, 0, 2, d) *= c1;
  cov.block(0, k, d, 2) *= c1;
  cov.block<2, 2>(k, k) =
      0.5 * (1.0 + c2) * a + 0.5 * (1.0 - c2) * jaj - c1 * c1 * mu * mu.transpose();
  mean.segment<2>(k) *= c1;
  return GaussianState(std::move(mean), std::move(cov));
}

/// Variance of a linear combination of quadratures: c^T cov c. Exact,
/// no sampling; means do not enter.
inline double combination_variance(const GaussianState& state,
                                   const QuadCombination& combo) {
  const Eigen::VectorXd c = combo.coefficient_vector(state.num_modes());
  return c.dot(state.cov() * c);
}

}  // namespace cvt
