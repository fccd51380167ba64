#include "wiggly/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "wiggly/error.hpp"

namespace wiggly {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class PwqPotential final : public PeriodicPotential {
 public:
  double value(double y) const override {
    const double r = y - std::round(y);
    return r * r;
  }
  double derivative(double y) const override { return 2.0 * (y - std::round(y)); }
  double second_derivative(double) const override { return 2.0; }
  PotentialKind kind() const override { return PotentialKind::piecewise_quadratic; }
  double lipschitz_bound() const override { return 1.0; }
  double min_value() const override { return 0.0; }
};

class CosinePotential final : public PeriodicPotential {
 public:
  double value(double y) const override { return -std::cos(kTwoPi * y) / kTwoPi; }
  double derivative(double y) const override { return std::sin(kTwoPi * y); }
  double second_derivative(double y) const override { return kTwoPi * std::cos(kTwoPi * y); }
  PotentialKind kind() const override { return PotentialKind::normalized_cosine; }
  double lipschitz_bound() const override { return 1.0; }
  double min_value() const override { return -1.0 / kTwoPi; }
};

class ZeroPotential final : public PeriodicPotential {
 public:
  double value(double) const override { return 0.0; }
  double derivative(double) const override { return 0.0; }
  double second_derivative(double) const override { return 0.0; }
  PotentialKind kind() const override { return PotentialKind::zero; }
  double lipschitz_bound() const override { return 0.0; }
  double min_value() const override { return 0.0; }
};

class TabulatedPotential final : public PeriodicPotential {
 public:
  explicit TabulatedPotential(std::vector<double> values) : values_(std::move(values)) {
    require(values_.size() >= 4, "tabulated potential needs at least 4 samples");
    for (double v : values_) require(std::isfinite(v), "tabulated potential has non-finite samples");
    const std::size_t n = values_.size();
    step_ = 1.0 / static_cast<double>(n - 1);

    std::vector<double> secant(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) secant[j] = (values_[j + 1] - values_[j]) / step_;

    auto blend = [](double left, double right) {
      if (left * right <= 0.0) return 0.0;
      return 2.0 / (1.0 / left + 1.0 / right);
    };

    slopes_.assign(n, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) slopes_[j] = blend(secant[j - 1], secant[j]);

    double scale = 0.0;
    for (double v : values_) scale = std::max(scale, std::abs(v));
    const bool seamless = std::abs(values_.front() - values_.back()) <= 1e-12 * std::max(1.0, scale);
    if (seamless) {
      slopes_.front() = blend(secant.back(), secant.front());
      slopes_.back() = slopes_.front();
    } else {
      slopes_.front() = secant.front();
      slopes_.back() = secant.back();
    }

    double lip = 0.0;
    double low = std::numeric_limits<double>::infinity();
    const int dense = 64 * static_cast<int>(n - 1);
    for (int i = 0; i <= dense; ++i) {
      const double y = static_cast<double>(i) / dense;
      lip = std::max(lip, std::abs(eval(y, 1)));
      low = std::min(low, eval(y, 0));
    }
    lipschitz_ = lip;
    // Hermite cubics may dip slightly between dense samples.
    min_value_ = low - lip / dense;
  }

  double value(double y) const override { return eval(y, 0); }
  double derivative(double y) const override { return eval(y, 1); }
  double second_derivative(double y) const override { return eval(y, 2); }
  PotentialKind kind() const override { return PotentialKind::tabulated; }
  double lipschitz_bound() const override { return lipschitz_; }
  double min_value() const override { return min_value_; }

 private:
  double eval(double y, int order) const {
    double u = y - std::floor(y);
    if (u >= 1.0) u = 0.0;
    const std::size_t last = values_.size() - 2;
    auto j = static_cast<std::size_t>(u / step_);
    if (j > last) j = last;
    const double t = (u - static_cast<double>(j) * step_) / step_;
    const double p0 = values_[j], p1 = values_[j + 1];
    const double m0 = slopes_[j] * step_, m1 = slopes_[j + 1] * step_;
    const double t2 = t * t, t3 = t2 * t;
    switch (order) {
      case 0:
        return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * p1 +
               (t3 - t2) * m1;
      case 1:
        return ((6 * t2 - 6 * t) * p0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * p1 +
                (3 * t2 - 2 * t) * m1) /
               step_;
      default:
        return ((12 * t - 6) * p0 + (6 * t - 4) * m0 + (-12 * t + 6) * p1 + (6 * t - 2) * m1) /
               (step_ * step_);
    }
  }

  std::vector<double> values_;
  std::vector<double> slopes_;
  double step_ = 0.0;
  double lipschitz_ = 0.0;
  double min_value_ = 0.0;
};

}  // namespace

double PeriodicPotential::second_derivative(double) const { return kNaN; }

const char* to_string(PotentialKind kind) noexcept {
  switch (kind) {
    case PotentialKind::piecewise_quadratic: return "pwq";
    case PotentialKind::normalized_cosine: return "cosine";
    case PotentialKind::tabulated: return "tabulated";
    case PotentialKind::zero: return "zero";
  }
  return "unknown";
}

PotentialPtr make_pwq_potential() { return std::make_shared<PwqPotential>(); }
PotentialPtr make_cosine_potential() { return std::make_shared<CosinePotential>(); }
PotentialPtr make_zero_potential() { return std::make_shared<ZeroPotential>(); }
PotentialPtr make_tabulated_potential(std::vector<double> values) {
  return std::make_shared<TabulatedPotential>(std::move(values));
}

PotentialPtr potential_by_name(const std::string& name) {
  if (name == "pwq") return make_pwq_potential();
  if (name == "cosine") return make_cosine_potential();
  if (name == "zero") return make_zero_potential();
  fail(ErrorCode::invalid_input, "unknown potential '" + name + "' (expected pwq, cosine, zero)");
}

PotentialPtr parse_potential_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_input, std::string("potential json: ") + e.what());
  }
  require(doc.is_object() && doc.value("kind", "") == "tabulated",
          "potential json must have \"kind\": \"tabulated\"");
  require(doc.contains("values") && doc["values"].is_array(), "potential json needs a \"values\" array");
  std::vector<double> values;
  for (const auto& v : doc["values"]) {
    require(v.is_number(), "potential json values must be numbers");
    values.push_back(v.get<double>());
  }
  return make_tabulated_potential(std::move(values));
}

PotentialPtr load_potential_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open potential file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_potential_json(buffer.str());
}

// ---------------------------------------------------------------------------

ConvexDrive ConvexDrive::quadratic(double curvature) {
  require(std::isfinite(curvature) && curvature > 0.0, "quadratic drive needs curvature > 0");
  return ConvexDrive(DriveKind::quadratic, {0.0, 0.0, 0.5 * curvature});
}

ConvexDrive ConvexDrive::polynomial(std::vector<double> coefficients) {
  while (coefficients.size() > 1 && coefficients.back() == 0.0) coefficients.pop_back();
  require(coefficients.size() >= 3, "polynomial drive must have degree >= 2");
  for (double c : coefficients) require(std::isfinite(c), "polynomial drive has non-finite coefficients");
  require(coefficients[0] == 0.0 && coefficients[1] == 0.0,
          "polynomial drive needs h(0) = 0 and h'(0) = 0");
  ConvexDrive drive(DriveKind::user_polynomial, std::move(coefficients));
  double previous = drive.derivative(-100.0);
  for (int i = 1; i <= 20000; ++i) {
    const double x = -100.0 + 0.01 * i;
    const double d = drive.derivative(x);
    require(d > previous, "polynomial drive is not strictly convex");
    previous = d;
  }
  return drive;
}

double ConvexDrive::value(double x) const {
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double ConvexDrive::derivative(double x) const {
  double acc = 0.0;
  for (std::size_t k = coefficients_.size() - 1; k >= 1; --k) acc = acc * x + k * coefficients_[k];
  return acc;
}

double ConvexDrive::second_derivative(double x) const {
  double acc = 0.0;
  for (std::size_t k = coefficients_.size() - 1; k >= 2; --k)
    acc = acc * x + static_cast<double>(k * (k - 1)) * coefficients_[k];
  return acc;
}

double ConvexDrive::curvature() const {
  return kind_ == DriveKind::quadratic ? 2.0 * coefficients_[2] : kNaN;
}

std::string ConvexDrive::name() const {
  if (kind_ == DriveKind::quadratic && coefficients_[2] == 0.5) return "quadratic";
  std::ostringstream out;
  out << "polynomial:";
  out.precision(17);
  for (std::size_t k = 0; k < coefficients_.size(); ++k) out << (k ? "," : "") << coefficients_[k];
  return out.str();
}

ConvexDrive drive_by_name(const std::string& name) {
  if (name == "quadratic") return ConvexDrive::quadratic();
  const std::string prefix = "polynomial:";
  if (name.rfind(prefix, 0) == 0) {
    std::vector<double> coefficients;
    std::stringstream in(name.substr(prefix.size()));
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        coefficients.push_back(std::stod(item));
      } catch (const std::exception&) {
        fail(ErrorCode::invalid_input, "bad polynomial coefficient '" + item + "'");
      }
    }
    return ConvexDrive::polynomial(std::move(coefficients));
  }
  fail(ErrorCode::invalid_input,
       "unknown drive '" + name + "' (expected quadratic or polynomial:c0,c1,...)");
}

OscillatingEnergy::OscillatingEnergy(ConvexDrive drive, PotentialPtr oscillation, double epsilon)
    : drive(std::move(drive)), oscillation(std::move(oscillation)), epsilon(epsilon) {
  require(this->oscillation != nullptr, "energy needs an oscillation");
  require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
}

// ---------------------------------------------------------------------------

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed || c.advisory; });
}

const ValidationCheck& ValidationReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  fail(ErrorCode::not_found, "no validation check named " + name);
}

ValidationReport validate_potential(const PeriodicPotential& w, int samples) {
  require(samples >= 16, "validate_potential needs samples >= 16");

  double periodic = 0.0, even = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double y = -3.0 + 6.0 * i / (samples - 1);
    periodic = std::max(periodic, std::abs(w.value(y + 1.0) - w.value(y)));
    even = std::max(even, std::abs(w.value(y) - w.value(-y)));
  }
  // Periodic reduction hides a jump at the integers; probe the seam directly.
  constexpr double eta = 1e-9;
  const double seam = std::abs(w.value(1.0 - eta) - w.value(eta));
  const double seam_allowance = 2.0 * eta * w.lipschitz_bound();
  periodic = std::max(periodic, std::max(0.0, seam - seam_allowance));

  const double mean = std::abs(simpson([&](double s) { return w.value(s); }, 0.0, 1.0, 1 << 10));

  double slope = 0.0;
  const int dense = std::max(samples, 10000);
  for (int i = 0; i < dense; ++i) slope = std::max(slope, std::abs(w.derivative(static_cast<double>(i) / dense)));

  ValidationReport report;
  report.checks.push_back({"periodicity", periodic <= 1e-12, periodic, 1e-12});
  report.checks.push_back({"evenness", even <= 1e-12, even, 1e-12});
  report.checks.push_back({"zero_mean", mean <= 1e-8, mean, 1e-8, true});
  report.checks.push_back({"lipschitz", std::abs(slope - 1.0) <= 1e-3, std::abs(slope - 1.0), 1e-3});
  return report;
}

}  // namespace wiggly
