#pragma once

#include <span>
#include <string>
#include <vector>

#include "torsionflow/geometry.hpp"

namespace torsionflow {

class DomainError : public Error {
 public:
  using Error::Error;
};

class WrongClass : public Error {
 public:
  using Error::Error;
};

class EpsilonOutOfRange : public Error {
 public:
  explicit EpsilonOutOfRange(double eps);
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

/// Class B: psi(0) = 0 and Psi(s) = int_0^s psi(t)/t dt.
/// Class C: Psi(s) = int_1^s psi(t)/t dt, Psi may be negative.
enum class OrliczClass { B, C };

const char* to_string(OrliczClass c);

/// Planar dimension; the regularized core is s^(kDimension + eps).
inline constexpr int kDimension = 2;

/// An Orlicz function psi with its primitive Psi.
///
/// Two kinds are supported: power(p) with psi(s) = s^p (class B for p > 0,
/// class C for p = 0) and a sampled table, linearly interpolated between its
/// knots and held constant beyond the last one.
class OrliczFamily {
 public:
  static OrliczFamily power(double p);
  /// Table on strictly increasing knots s >= 0. A class B table must start at
  /// s = 0 with value 0.
  static OrliczFamily table(std::vector<double> s, std::vector<double> values, OrliczClass cls);

  bool is_power() const { return kind_ == Kind::Power; }
  double exponent() const { return p_; }
  OrliczClass class_tag() const { return class_; }
  /// max{1, max_{s in [0,2]} psi(s)}.
  double c0() const { return c0_; }
  std::span<const double> knots() const { return s_; }
  std::span<const double> knot_values() const { return v_; }

  double psi(double s) const;
  /// Primitive of psi(t)/t from the class base point (0 for B, 1 for C).
  double capital_psi(double s) const;

  std::string describe() const;

 private:
  enum class Kind { Power, Table };
  Kind kind_ = Kind::Power;
  double p_ = 0.0;
  std::vector<double> s_, v_;
  OrliczClass class_ = OrliczClass::B;
  double c0_ = 1.0;

  double table_integral(double a, double b) const;
};

/// psi blended onto s^(2+eps) near zero:
///   s^(2+eps) on [0, eps], psi on [2 eps, inf), and on the bridge
///   (1 - w(u)) s^(2+eps) + w(u) psi(s), u = (s - eps)/eps,
/// with the quintic smoothstep w(u) = 6u^5 - 15u^4 + 10u^3.
class RegularizedOrlicz {
 public:
  RegularizedOrlicz(OrliczFamily base, double epsilon);

  const OrliczFamily& base() const { return base_; }
  double epsilon() const { return eps_; }

  double psi_hat(double s) const;
  /// int_0^s psi_hat(t)/t dt; zero at s = 0.
  double capital_psi_hat(double s) const;

 private:
  OrliczFamily base_;
  double eps_;
  double bridge_integral_ = 0.0;

  double bridge(double a, double b) const;
};

/// Throws WrongClass for class C input and EpsilonOutOfRange unless
/// 0 < epsilon <= 1/2.
RegularizedOrlicz regularize(const OrliczFamily& family, double epsilon);

struct SmallSCondition {
  bool holds = false;
  /// True when the answer is a sampled trend rather than exact.
  bool heuristic = false;
};

/// liminf_{s->0+} s^2 / psi(s) = infinity. Exact for power families.
SmallSCondition satisfies_small_s_condition(const OrliczFamily& family);

/// inf over grid directions u of int Psi(|<u, x>|) f(x) dx with f sampled on
/// the uniform angular grid (linearly interpolated between samples).
double class_c_admissibility(const OrliczFamily& family, std::span<const double> f);

}  // namespace torsionflow
