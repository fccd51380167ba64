#pragma once

#include <memory>
#include <string>
#include <vector>

namespace wiggly {

enum class PotentialKind { piecewise_quadratic, normalized_cosine, tabulated, zero };

const char* to_string(PotentialKind kind) noexcept;

/// A 1-periodic oscillation W(y). Implementations are immutable after
/// construction, so a single instance may be shared across threads.
class PeriodicPotential {
 public:
  virtual ~PeriodicPotential() = default;

  virtual double value(double y) const = 0;
  virtual double derivative(double y) const = 0;
  /// NaN where no closed form is available.
  virtual double second_derivative(double y) const;
  virtual PotentialKind kind() const = 0;

  /// Upper bound on sup|W'|.
  virtual double lipschitz_bound() const = 0;
  /// Lower bound on inf W, used to prune proximal search cells.
  virtual double min_value() const = 0;

  std::string name() const { return to_string(kind()); }
};

using PotentialPtr = std::shared_ptr<const PeriodicPotential>;

/// W(y) = min_k (y - k)^2.
PotentialPtr make_pwq_potential();
/// W(y) = -cos(2 pi y) / (2 pi): unit period, zero mean, sup|W'| = 1.
PotentialPtr make_cosine_potential();
/// W = 0. Violates the unit-Lipschitz normalization; accepted for closed-form tests.
PotentialPtr make_zero_potential();
/// Samples of W at y_j = j/(N-1), j = 0..N-1, spanning one closed period [0, 1].
/// Interpolated by monotone (Fritsch-Carlson) cubic Hermite and extended periodically.
/// A mismatch between the first and last sample shows up as a seam jump at the integers.
PotentialPtr make_tabulated_potential(std::vector<double> values);

/// Built-in lookup by name: "pwq", "cosine", "zero".
PotentialPtr potential_by_name(const std::string& name);
/// Reads `{ "kind": "tabulated", "values": [...] }`.
PotentialPtr load_potential_json(const std::string& path);
PotentialPtr parse_potential_json(const std::string& text);

enum class DriveKind { quadratic, user_polynomial };

/// Strictly convex bulk energy h with h(0) = 0 = min h, stored as a polynomial
/// sum_k c_k x^k.
class ConvexDrive {
 public:
  /// h(x) = curvature * x^2 / 2.
  static ConvexDrive quadratic(double curvature = 1.0);
  /// Coefficients c_0, c_1, ... of h(x) = sum c_k x^k. Throws invalid_input unless
  /// c_0 = c_1 = 0 and h' is strictly increasing on a sampled grid.
  static ConvexDrive polynomial(std::vector<double> coefficients);

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  DriveKind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  /// h'' for the quadratic kind; NaN otherwise.
  double curvature() const;
  std::string name() const;

  friend bool operator==(const ConvexDrive&, const ConvexDrive&) = default;

 private:
  ConvexDrive(DriveKind kind, std::vector<double> coefficients)
      : kind_(kind), coefficients_(std::move(coefficients)) {}

  DriveKind kind_;
  std::vector<double> coefficients_;
};

ConvexDrive drive_by_name(const std::string& name);

/// E_eps(x) = h(x) + eps * W(x / eps).
struct OscillatingEnergy {
  ConvexDrive drive;
  PotentialPtr oscillation;
  double epsilon;

  OscillatingEnergy(ConvexDrive drive, PotentialPtr oscillation, double epsilon);

  double value(double x) const {
    return drive.value(x) + epsilon * oscillation->value(x / epsilon);
  }
  double derivative(double x) const {
    return drive.derivative(x) + oscillation->derivative(x / epsilon);
  }
};

struct ValidationCheck {
  std::string name;
  bool passed;
  double residual;
  double tolerance;
  /// Advisory checks are reported but do not affect all_passed(). Zero mean is
  /// advisory: adding a constant to W leaves every minimizer unchanged.
  bool advisory = false;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  /// True when every non-advisory check passed.
  bool all_passed() const;
  const ValidationCheck& check(const std::string& name) const;
};

/// Numerical check of the standing hypotheses on W: periodicity (including
/// continuity across the period seam), evenness, zero mean by composite Simpson
/// with 2^10 panels, and sup|W'| = 1 by dense sampling. `samples` uniform points
/// on [-3, 3] are used for the pointwise checks; requires samples >= 16.
ValidationReport validate_potential(const PeriodicPotential& potential, int samples);

/// Composite Simpson on [a, b] with `panels` (even) subintervals.
template <class F>
double simpson(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

}  // namespace wiggly
