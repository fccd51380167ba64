#include "wiggly/pwq_oracle.hpp"

#include <cmath>

#include "wiggly/error.hpp"

namespace wiggly::pwq {

namespace {

void check_gamma(double gamma) { require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive"); }

double well(double y, double k) { return (y - k) * (y - k); }

}  // namespace

PwqState PwqState::make(double T, double gamma) {
  check_gamma(gamma);
  const double t_gamma = threshold(gamma);
  return {gamma, T, ((2 + gamma) / (2 * gamma)) * (T - t_gamma), t_gamma};
}

double candidate(std::int64_t k, double T, double gamma, double y0) {
  check_gamma(gamma);
  return (-T + 2 * static_cast<double>(k)) / (2 + gamma) + (gamma / (2 + gamma)) * y0;
}

double psi(double y0, double T, double gamma) {
  const double left = candidate(-1, T, gamma, y0);
  const double stay = candidate(0, T, gamma, y0);
  return (T * left + well(left, -1) + (gamma / 2) * (left - y0) * (left - y0)) -
         (T * stay + well(stay, 0) + (gamma / 2) * (stay - y0) * (stay - y0));
}

std::vector<double> in_well_orbit(double y0, double T, double gamma, std::int64_t h_steps) {
  check_gamma(gamma);
  require(h_steps >= 1, "h_steps must be >= 1");
  std::vector<double> orbit;
  orbit.reserve(static_cast<std::size_t>(h_steps) + 1);
  for (std::int64_t h = 0; h <= h_steps; ++h) {
    const double y = std::pow(gamma / (2 + gamma), static_cast<double>(h)) * (y0 + T / 2) - T / 2;
    if (h < h_steps && psi(y, T, gamma) < 0.0)
      fail(ErrorCode::well_escape, "orbit leaves well 0 after step " + std::to_string(h));
    orbit.push_back(y);
  }
  return orbit;
}

std::int64_t escape_steps(double T, double gamma) {
  check_gamma(gamma);
  const double t_gamma = threshold(gamma);
  if (T <= t_gamma) fail(ErrorCode::pinned, "T <= T_gamma: the orbit never escapes");
  const double ratio = std::log(((2 + gamma) / gamma) * (T - t_gamma) / (T + 1)) / std::log(gamma / (2 + gamma));
  return static_cast<std::int64_t>(std::floor(ratio)) + 1;
}

double velocity_estimate(double T, double gamma) {
  check_gamma(gamma);
  const double t_gamma = threshold(gamma);
  if (T <= t_gamma) fail(ErrorCode::pinned, "T <= T_gamma: velocity is zero");
  return std::log(gamma / (2 + gamma)) / std::log(((2 + gamma) / gamma) * (T - t_gamma) / (T + 1));
}

double threshold(double gamma) {
  check_gamma(gamma);
  return gamma / (2 + gamma);
}

double t_infinity() { return 1.0; }

}  // namespace wiggly::pwq
