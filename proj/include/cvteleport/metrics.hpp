// Figures of merit: coherent-state teleportation fidelity, the Duan
// inseparability criterion, normalized feedforward gains, and dB
// conversions.

#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "cvteleport/gaussian.hpp"

namespace cvt {

struct FidelityResult {
  double sigma_x = 0.0;  // output x variance
  double sigma_p = 0.0;  // output p variance
  double fidelity = 0.0;
};

/// Fidelity for a coherent-state input at unity gain:
/// F = 2 / sqrt((1 + 4 sigma_x)(1 + 4 sigma_p)).
/// Independent of the input amplitude. At non-unity gain the same
/// number is only a conditional figure (the amplitude mismatch is not
/// averaged over); callers report that case with a warning.
inline FidelityResult fidelity_coherent(double sigma_x, double sigma_p) {
  if (!(sigma_x > 0.0) || !(sigma_p > 0.0))
    throw std::invalid_argument("fidelity_coherent: variances must be positive");
  FidelityResult r;
  r.sigma_x = sigma_x;
  r.sigma_p = sigma_p;
  r.fidelity = 2.0 / std::sqrt((1.0 + 4.0 * sigma_x) * (1.0 + 4.0 * sigma_p));
  return r;
}

struct DuanResult {
  double v_x_minus = 0.0;  // <[Delta(x_i - x_j)]^2>
  double v_p_plus = 0.0;   // <[Delta(p_i + p_j)]^2>
  double delta = 0.0;      // their sum
  bool entangled = false;  // delta < 1
  bool below_half = false; // delta < 1/2
};

/// Inseparability criterion for a mode pair:
/// Delta = <[Delta(x_i - x_j)]^2> + <[Delta(p_i + p_j)]^2>.
/// Delta < 1 certifies entanglement; Delta < 1/2 is the (symmetric)
/// budget needed for teleportation fidelity above 2/3.
inline DuanResult duan(const GaussianState& state, ModeId i, ModeId j) {
  if (i == j) throw std::invalid_argument("duan: modes must differ");
  state.check_mode(i);
  state.check_mode(j);
  DuanResult r;
  r.v_x_minus = combination_variance(state, QuadCombination::difference(Quadrature::x, i, j));
  r.v_p_plus = combination_variance(state, QuadCombination::sum(Quadrature::p, i, j));
  r.delta = r.v_x_minus + r.v_p_plus;
  r.entangled = r.delta < 1.0;
  r.below_half = r.delta < 0.5;
  return r;
}

/// Normalized gains g_x = <x_out>/<x_in>, g_p = <p_out>/<p_in>.
inline std::pair<double, double> normalized_gain(std::pair<double, double> in_mean,
                                                 std::pair<double, double> out_mean) {
  if (in_mean.first == 0.0 || in_mean.second == 0.0)
    throw std::invalid_argument("normalized_gain: undefined for zero input mean");
  return {out_mean.first / in_mean.first, out_mean.second / in_mean.second};
}

inline double to_db(double v, double v_ref) {
  if (!(v > 0.0) || !(v_ref > 0.0))
    throw std::invalid_argument("to_db: values must be positive");
  return 10.0 * std::log10(v / v_ref);
}

inline double from_db(double db, double v_ref) {
  if (!(v_ref > 0.0)) throw std::invalid_argument("from_db: reference must be positive");
  return v_ref * std::pow(10.0, db / 10.0);
}

/// Fidelity implied by a Duan value under a symmetric split
/// (V_x = V_p = delta/2): sigma = 1/4 + delta/2 per quadrature, which
/// maps delta = 1 -> 1/2 and delta = 1/2 -> 2/3 exactly.
inline double fidelity_from_duan_symmetric(double delta) {
  if (!(delta >= 0.0))
    throw std::invalid_argument("fidelity_from_duan_symmetric: delta must be >= 0");
  const double sigma = kVacuumVariance + delta / 2.0;
  return fidelity_coherent(sigma, sigma).fidelity;
}

}  // namespace cvt
