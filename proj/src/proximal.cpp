#include "wiggly/proximal.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "wiggly/error.hpp"

namespace wiggly {

Objective Objective::linear(double slope, PotentialPtr potential, double scale) {
  require(potential != nullptr, "objective needs a potential");
  require(std::isfinite(slope), "objective slope must be finite");
  require(std::isfinite(scale) && scale > 0.0, "objective scale must be positive");
  Objective o;
  o.drive_kind = Drive::linear;
  o.slope = slope;
  o.potential = std::move(potential);
  o.scale = scale;
  return o;
}

Objective Objective::energy(const OscillatingEnergy& energy) {
  Objective o;
  o.drive_kind = Drive::convex;
  o.drive = energy.drive;
  o.potential = energy.oscillation;
  o.scale = energy.epsilon;
  return o;
}

double Objective::drive_value(double x) const {
  return drive_kind == Drive::linear ? slope * x : drive->value(x);
}

double Objective::drive_derivative(double x) const {
  return drive_kind == Drive::linear ? slope : drive->derivative(x);
}

double Objective::value(double x) const { return drive_value(x) + scale * potential->value(x / scale); }

double Objective::derivative(double x) const {
  return drive_derivative(x) + potential->derivative(x / scale);
}

double Objective::second_derivative(double x) const {
  const double d2 = drive_kind == Drive::linear ? 0.0 : drive->second_derivative(x);
  return d2 + potential->second_derivative(x / scale) / scale;
}

bool Objective::same_as(const Objective& other) const {
  return drive_kind == other.drive_kind && slope == other.slope && drive == other.drive &&
         potential == other.potential && scale == other.scale;
}

ProxProblem linear_prox_problem(double slope, double gamma, PotentialPtr potential, double center) {
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
  ProxProblem p;
  p.objective = Objective::linear(slope, std::move(potential));
  p.slope_bound = std::abs(slope) + p.objective.potential->lipschitz_bound();
  p.beta = 0.5 * gamma;
  p.center = center;
  return p;
}

ProxProblem energy_prox_problem(const OscillatingEnergy& energy, double tau, double center) {
  require(std::isfinite(tau) && tau > 0.0, "tau must be positive");
  ProxProblem p;
  p.objective = Objective::energy(energy);
  // For convex h a minimizer x* right of the center has h'(x*) >= h'(center), and
  // symmetrically on the left, so |h'(center)| + Lip(W) bounds the displacement.
  p.slope_bound = std::abs(energy.drive.derivative(center)) + energy.oscillation->lipschitz_bound();
  p.beta = 0.5 / tau;
  p.center = center;
  return p;
}

namespace {

constexpr int kCellSamples = 64;
constexpr int kMaxExpansions = 6;

class Solver {
 public:
  Solver(const ProxProblem& p, const ProxOptions& options) : p_(p), phi_(p.objective), options_(options) {}

  double total(double x) const {
    const double d = x - p_.center;
    return phi_.value(x) + p_.beta * d * d;
  }
  double slope(double x) const { return phi_.derivative(x) + 2.0 * p_.beta * (x - p_.center); }

  // Minimizer of the smooth part q(x) = drive(x) + beta (x - c)^2.
  double smooth_argmin() const {
    if (phi_.drive_kind == Objective::Drive::linear) return p_.center - phi_.slope / (2.0 * p_.beta);
    auto dq = [&](double x) { return phi_.drive_derivative(x) + 2.0 * p_.beta * (x - p_.center); };
    double lo = p_.center, hi = p_.center;
    double step = 1.0;
    while (dq(lo) > 0.0) {
      lo -= step;
      step *= 2.0;
    }
    step = 1.0;
    while (dq(hi) < 0.0) {
      hi += step;
      step *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 4 * DBL_EPSILON * std::max(1.0, std::abs(lo)); ++i) {
      const double mid = 0.5 * (lo + hi);
      (dq(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  double smooth_value(double x) const {
    const double d = x - p_.center;
    return phi_.drive_value(x) + p_.beta * d * d;
  }

  // Lower bound of the full objective on [a, b].
  double cell_lower_bound(double a, double b) const {
    const double x = std::clamp(q_star_, a, b);
    return smooth_value(x) + phi_.scale * phi_.potential->min_value();
  }

  bool closed_form_cell() const {
    if (!options_.use_closed_forms) return false;
    if (phi_.potential->kind() != PotentialKind::piecewise_quadratic) return false;
    return phi_.drive_kind == Objective::Drive::linear || phi_.drive->kind() == DriveKind::quadratic;
  }

  // Inside cell k the pwq oscillation is (x - s k)^2 / s, so the objective is a
  // convex quadratic with a single stationary point.
  void minimize_cell_closed_form(long long k, double a, double b) {
    const double s = phi_.scale;
    const double kk = static_cast<double>(k);
    double x;
    if (phi_.drive_kind == Objective::Drive::linear) {
      x = (2.0 * kk + 2.0 * p_.beta * p_.center - phi_.slope) / (2.0 / s + 2.0 * p_.beta);
    } else {
      x = (2.0 * kk + 2.0 * p_.beta * p_.center) / (phi_.drive->curvature() + 2.0 / s + 2.0 * p_.beta);
    }
    add(std::clamp(x, a, b));
  }

  void minimize_cell_sampled(double a, double b) {
    // Nudge inward so one-sided derivatives at well boundaries belong to this cell.
    const double nudge = 1e-12 * (b - a);
    double xs[kCellSamples + 1];
    double gs[kCellSamples + 1];
    for (int j = 0; j <= kCellSamples; ++j) {
      double x = a + (b - a) * j / kCellSamples;
      if (j == 0) x = a + nudge;
      if (j == kCellSamples) x = b - nudge;
      xs[j] = x;
      gs[j] = slope(x);
    }
    bool derivative_ok = true;
    for (double g : gs) derivative_ok = derivative_ok && std::isfinite(g);
    if (!derivative_ok) {
      golden_fallback(a, b);
      return;
    }
    if (gs[0] >= 0.0) add(a);
    if (gs[kCellSamples] <= 0.0) add(b);
    for (int j = 0; j < kCellSamples; ++j) {
      if (gs[j] < 0.0 && gs[j + 1] >= 0.0) add(polish(xs[j], xs[j + 1]));
    }
  }

  // Safeguarded Newton on the derivative; bisection when Newton leaves the bracket.
  double polish(double lo, double hi) const {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double g = slope(x);
      if (g == 0.0) return x;
      (g < 0.0 ? lo : hi) = x;
      if (hi - lo <= 1e-12 * std::max(phi_.scale, 4 * DBL_EPSILON * std::abs(x))) break;
      const double h = phi_.second_derivative(x) + 2.0 * p_.beta;
      double next = (std::isfinite(h) && h > 0.0) ? x - g / h : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == x) break;
      x = next;
    }
    return x;
  }

  void golden_fallback(double a, double b) {
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    int best_j = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= kCellSamples; ++j) {
      const double v = total(a + (b - a) * j / kCellSamples);
      if (v < best_v) {
        best_v = v;
        best_j = j;
      }
    }
    double lo = a + (b - a) * std::max(0, best_j - 1) / kCellSamples;
    double hi = a + (b - a) * std::min(kCellSamples, best_j + 1) / kCellSamples;
    double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
    double f1 = total(x1), f2 = total(x2);
    while (hi - lo > 1e-12 * phi_.scale) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - ratio * (hi - lo);
        f1 = total(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + ratio * (hi - lo);
        f2 = total(x2);
      }
    }
    add(0.5 * (lo + hi));
  }

  void add(double x) {
    const double v = total(x);
    found_.push_back({x, v});
    best_ = std::min(best_, v);
  }

  void minimize_cell(long long k, double a, double b) {
    if (closed_form_cell())
      minimize_cell_closed_form(k, a, b);
    else
      minimize_cell_sampled(a, b);
  }

  ProxResult run() {
    require(std::isfinite(p_.beta) && p_.beta > 0.0, "prox_step needs beta > 0");
    require(std::isfinite(p_.center), "prox_step needs a finite center");
    require(phi_.potential != nullptr, "prox_step needs a potential");
    require(std::isfinite(p_.slope_bound) && p_.slope_bound >= 0.0, "prox_step needs a slope bound >= 0");

    const double s = phi_.scale;
    q_star_ = smooth_argmin();
    double radius = p_.slope_bound / (2.0 * p_.beta) + s;

    for (int expansion = 0; expansion <= kMaxExpansions; ++expansion, radius *= 2.0) {
      found_.clear();
      best_ = std::numeric_limits<double>::infinity();
      const double left = p_.center - radius, right = p_.center + radius;
      const auto k_min = static_cast<long long>(std::floor(left / s + 0.5));
      const auto k_max = static_cast<long long>(std::floor(right / s + 0.5));
      const auto k_start =
          std::clamp(static_cast<long long>(std::floor(q_star_ / s + 0.5)), k_min, k_max);

      auto cell = [&](long long k) {
        const double a = std::max(left, s * (static_cast<double>(k) - 0.5));
        const double b = std::min(right, s * (static_cast<double>(k) + 0.5));
        return std::pair{a, b};
      };
      auto band = [&] { return kTieReportTolerance * std::max(1.0, std::abs(best_)); };

      bool reached_left = true, reached_right = true;
      for (long long k = k_start; k >= k_min; --k) {
        const auto [a, b] = cell(k);
        if (k != k_start && cell_lower_bound(a, b) > best_ + band()) {
          reached_left = false;
          break;
        }
        minimize_cell(k, a, b);
      }
      for (long long k = k_start + 1; k <= k_max; ++k) {
        const auto [a, b] = cell(k);
        if (cell_lower_bound(a, b) > best_ + band()) {
          reached_right = false;
          break;
        }
        minimize_cell(k, a, b);
      }

      const bool left_open = reached_left && total(left) <= best_;
      const bool right_open = reached_right && total(right) <= best_;
      if (!left_open && !right_open) return finish();
    }
    fail(ErrorCode::non_coercive,
         "proximal search window did not enclose the minimizer; slope bound too small?");
  }

  ProxResult finish() {
    const double report = kTieReportTolerance * std::max(1.0, std::abs(best_));
    // Rounding level of the best value: the sum of the magnitudes of its terms.
    const auto best_it = std::min_element(found_.begin(), found_.end(),
                                          [](const auto& l, const auto& r) { return l.value < r.value; });
    const double select = 4.0 * DBL_EPSILON * term_magnitude(best_it->location);
    std::sort(found_.begin(), found_.end(),
              [](const auto& l, const auto& r) { return l.location < r.location; });

    ProxResult result;
    const double merge = 1e-9 * phi_.scale;
    for (const auto& c : found_) {
      if (c.value > best_ + report) continue;
      if (!result.candidates.empty() && c.location - result.candidates.back().location <= merge) {
        if (c.value < result.candidates.back().value) result.candidates.back() = c;
        continue;
      }
      result.candidates.push_back(c);
    }
    result.tie_detected = result.candidates.size() > 1;
    for (const auto& c : result.candidates) {
      if (c.value <= best_ + select) {
        result.minimizer = c.location;
        result.value = c.value;
        break;
      }
    }
    return result;
  }

 private:
  double term_magnitude(double x) const {
    const double d = x - p_.center;
    return std::abs(phi_.drive_value(x)) + phi_.scale * std::abs(phi_.potential->value(x / phi_.scale)) +
           p_.beta * d * d;
  }

  const ProxProblem& p_;
  const Objective& phi_;
  ProxOptions options_;
  double q_star_ = 0.0;
  double best_ = 0.0;
  std::vector<ProxCandidate> found_;
};

}  // namespace

ProxResult prox_step(const ProxProblem& problem, const ProxOptions& options) {
  return Solver(problem, options).run();
}

bool prox_selection_monotone_check(const ProxProblem& a, const ProxProblem& b) {
  require(a.objective.same_as(b.objective) && a.beta == b.beta,
          "selection monotonicity compares problems with one objective and beta");
  require(a.center <= b.center, "selection monotonicity needs center(a) <= center(b)");
  return prox_step(a).minimizer <= prox_step(b).minimizer + 1e-10;
}

}  // namespace wiggly
