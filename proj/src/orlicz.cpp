#include "torsionflow/orlicz.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

namespace torsionflow {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

constexpr unsigned kMaxDepth = 20;
constexpr double kQuadratureTolerance = 1e-12;

template <class F>
double integrate(F&& f, double a, double b) {
  if (b <= a) return 0.0;
  return Kronrod::integrate(f, a, b, kMaxDepth, kQuadratureTolerance);
}

double smoothstep5(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }

}  // namespace

EpsilonOutOfRange::EpsilonOutOfRange(double eps)
    : Error("epsilon must lie in (0, 1/2], got " + std::to_string(eps)) {}

const char* to_string(OrliczClass c) { return c == OrliczClass::B ? "B" : "C"; }

OrliczFamily OrliczFamily::power(double p) {
  if (!(p >= 0.0) || !std::isfinite(p))
    throw DomainError("power family exponent must be finite and >= 0");
  OrliczFamily f;
  f.kind_ = Kind::Power;
  f.p_ = p;
  f.class_ = p > 0.0 ? OrliczClass::B : OrliczClass::C;
  f.c0_ = std::max(1.0, std::pow(2.0, p));
  return f;
}

OrliczFamily OrliczFamily::table(std::vector<double> s, std::vector<double> values,
                                 OrliczClass cls) {
  if (s.size() != values.size() || s.size() < 2)
    throw DomainError("psi table needs at least two (s, psi) pairs of equal length");
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!std::isfinite(s[k]) || !std::isfinite(values[k]))
      throw DomainError("psi table contains non-finite entries");
    if (k > 0 && !(s[k] > s[k - 1])) throw DomainError("psi table knots must increase strictly");
  }
  if (s.front() < 0.0) throw DomainError("psi table knots must be >= 0");
  if (cls == OrliczClass::B) {
    if (s.front() != 0.0 || values.front() != 0.0)
      throw DomainError("class B table must start at (0, 0)");
    for (std::size_t k = 1; k < values.size(); ++k)
      if (!(values[k] > 0.0)) throw DomainError("psi must be positive for s > 0");
  } else {
    for (double v : values)
      if (!(v > 0.0)) throw DomainError("class C psi must be positive");
  }
  OrliczFamily f;
  f.kind_ = Kind::Table;
  f.s_ = std::move(s);
  f.v_ = std::move(values);
  f.class_ = cls;
  double m = f.psi(2.0);
  for (std::size_t k = 0; k < f.s_.size() && f.s_[k] <= 2.0; ++k) m = std::max(m, f.v_[k]);
  f.c0_ = std::max(1.0, m);
  return f;
}

double OrliczFamily::psi(double s) const {
  if (!(s >= 0.0)) throw DomainError("psi evaluated at negative argument");
  if (kind_ == Kind::Power) return p_ == 0.0 ? 1.0 : std::pow(s, p_);
  if (s <= s_.front()) return v_.front();
  if (s >= s_.back()) return v_.back();
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const std::size_t k = std::size_t(it - s_.begin());
  const double w = (s - s_[k - 1]) / (s_[k] - s_[k - 1]);
  return (1.0 - w) * v_[k - 1] + w * v_[k];
}

double OrliczFamily::table_integral(double a, double b) const {
  // Split at the knots so every piece is smooth.
  double total = 0.0;
  double lo = a;
  for (double knot : s_) {
    if (knot <= lo) continue;
    if (knot >= b) break;
    total += integrate([this](double t) { return psi(t) / t; }, lo, knot);
    lo = knot;
  }
  total += integrate([this](double t) { return psi(t) / t; }, lo, b);
  return total;
}

double OrliczFamily::capital_psi(double s) const {
  if (!(s > 0.0)) throw DomainError("Psi requires s > 0");
  if (kind_ == Kind::Power) return p_ == 0.0 ? std::log(s) : std::pow(s, p_) / p_;
  if (class_ == OrliczClass::B) return table_integral(0.0, s);
  return s >= 1.0 ? table_integral(1.0, s) : -table_integral(s, 1.0);
}

std::string OrliczFamily::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::Power)
    os << "power(" << p_ << ")";
  else
    os << "table(" << s_.size() << " knots)";
  os << " class " << to_string(class_);
  return os.str();
}

RegularizedOrlicz::RegularizedOrlicz(OrliczFamily base, double epsilon)
    : base_(std::move(base)), eps_(epsilon) {
  if (base_.class_tag() != OrliczClass::B)
    throw WrongClass("regularization requires a class B family, got " + base_.describe());
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw EpsilonOutOfRange(epsilon);
  bridge_integral_ = bridge(eps_, 2.0 * eps_);
}

double RegularizedOrlicz::psi_hat(double s) const {
  if (!(s >= 0.0)) throw DomainError("psi_hat evaluated at negative argument");
  const double core_exp = kDimension + eps_;
  if (s <= eps_) return std::pow(s, core_exp);
  if (s >= 2.0 * eps_) return base_.psi(s);
  const double w = smoothstep5((s - eps_) / eps_);
  return (1.0 - w) * std::pow(s, core_exp) + w * base_.psi(s);
}

/// Fixed Gauss rule on each smooth piece: adaptive Kronrod stalls on the
/// very short intervals that arise when s sits just above epsilon.
double RegularizedOrlicz::bridge(double a, double b) const {
  const auto integrand = [this](double t) { return psi_hat(t) / t; };
  double total = 0.0, lo = a;
  for (double knot : base_.knots()) {
    if (knot <= lo) continue;
    if (knot >= b) break;
    total += boost::math::quadrature::gauss<double, 30>::integrate(integrand, lo, knot);
    lo = knot;
  }
  if (b > lo) total += boost::math::quadrature::gauss<double, 30>::integrate(integrand, lo, b);
  return total;
}

double RegularizedOrlicz::capital_psi_hat(double s) const {
  if (!(s >= 0.0)) throw DomainError("Psi_hat evaluated at negative argument");
  const double core_exp = kDimension + eps_;
  if (s <= eps_) return std::pow(s, core_exp) / core_exp;
  const double core = std::pow(eps_, core_exp) / core_exp;
  if (s < 2.0 * eps_) return core + bridge(eps_, s);
  return core + bridge_integral_ + base_.capital_psi(s) - base_.capital_psi(2.0 * eps_);
}

RegularizedOrlicz regularize(const OrliczFamily& family, double epsilon) {
  return RegularizedOrlicz(family, epsilon);
}

SmallSCondition satisfies_small_s_condition(const OrliczFamily& family) {
  if (family.class_tag() != OrliczClass::B)
    throw WrongClass("condition on s^2/psi(s) applies to class B families only");
  if (family.is_power()) return {family.exponent() > double(kDimension), false};

  // Trend of s^2/psi(s) over the smallest positive knots, walking towards 0.
  const auto s = family.knots();
  const auto v = family.knot_values();
  std::vector<double> ratios;
  for (std::size_t k = 1; k < s.size() && ratios.size() < 6; ++k)
    ratios.push_back(s[k] * s[k] / v[k]);
  bool increasing = ratios.size() >= 2;
  for (std::size_t k = 1; k < ratios.size(); ++k)
    increasing = increasing && ratios[k - 1] > ratios[k];
  return {increasing, true};
}

double class_c_admissibility(const OrliczFamily& family, std::span<const double> f) {
  if (family.class_tag() != OrliczClass::C)
    throw WrongClass("admissibility integral applies to class C families only");
  const std::size_t n = f.size();
  if (n < 4) throw DomainError("density needs at least four samples");
  for (double v : f)
    if (!(v > 0.0)) throw DomainError("density samples must be positive");

  const double d = kTwoPi / double(n);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double uk = d * double(k);
    // Zeros of <u, x>, where the integrand has an integrable log singularity.
    const double z1 = std::fmod(uk + 0.5 * std::numbers::pi, kTwoPi);
    const double z2 = std::fmod(uk + 1.5 * std::numbers::pi, kTwoPi);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = d * double(j), b = d * double(j + 1);
      const double fa = f[j], fb = f[(j + 1) % n];
      auto integrand = [&](double t) {
        const double c = std::abs(std::cos(t - uk));
        if (c < 1e-12) return 0.0;
        const double w = (t - a) / d;
        return family.capital_psi(c) * ((1.0 - w) * fa + w * fb);
      };
      std::vector<double> cuts{a};
      for (double z : {z1, z2})
        if (z > a && z < b) cuts.push_back(z);
      std::sort(cuts.begin(), cuts.end());
      cuts.push_back(b);
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) total += integrate(integrand, cuts[c], cuts[c + 1]);
    }
    if (!std::isfinite(total)) throw NonFinite("admissibility integral diverged");
    best = std::min(best, total);
  }
  return best;
}

}  // namespace torsionflow
