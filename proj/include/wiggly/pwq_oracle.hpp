#pragma once

#include <cstdint>
#include <vector>

// Closed forms for W(y) = min_k (y - k)^2 with drive slope T and gamma = eps / tau.
// Expressions keep the term order of their derivation (no simplification) so a
// disagreement with the generic solver points at one side or the other.
namespace wiggly::pwq {

struct PwqState {
  double gamma;
  double T;
  double delta_T;  ///< ((2 + gamma) / (2 gamma)) (T - T_gamma)
  double T_gamma;  ///< gamma / (2 + gamma)

  static PwqState make(double T, double gamma);
};

/// Stationary point of T y + (y - k)^2 + (gamma/2)(y - y0)^2:
/// (-T + 2k) / (2 + gamma) + gamma / (2 + gamma) * y0.
double candidate(std::int64_t k, double T, double gamma, double y0);

/// Value at the k = -1 candidate minus value at the k = 0 candidate. Negative
/// means the next iterate jumps one well to the left.
double psi(double y0, double T, double gamma);

/// y_h = (gamma / (2 + gamma))^h (y0 + T/2) - T/2 for h = 0..h_steps. Throws
/// well_escape if psi(y_h) < 0 for some h < h_steps.
std::vector<double> in_well_orbit(double y0, double T, double gamma, std::int64_t h_steps);

/// floor(log(((2 + gamma) / gamma) (T - T_gamma) / (T + 1)) / log(gamma / (2 + gamma))) + 1.
/// Throws pinned for T <= T_gamma.
std::int64_t escape_steps(double T, double gamma);

/// Near-threshold asymptotic velocity
/// log(gamma / (2 + gamma)) / log(((2 + gamma) / gamma) (T - T_gamma) / (T + 1)).
/// Throws pinned for T <= T_gamma.
double velocity_estimate(double T, double gamma);

/// gamma / (2 + gamma).
double threshold(double gamma);

/// sup over gamma of the threshold.
double t_infinity();

}  // namespace wiggly::pwq
