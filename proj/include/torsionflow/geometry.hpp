#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace torsionflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  GridMismatch(std::size_t a, std::size_t b);
};

class NonPositive : public Error {
 public:
  NonPositive(double min_h, std::size_t index);
  double min_h;
  std::size_t index;
};

class NonConvex : public Error {
 public:
  NonConvex(double min_rho, std::size_t index);
  double min_rho;
  std::size_t index;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Unit normal x(theta) and its counter-clockwise rotation x_perp(theta).
inline Vec2 unit(double theta) { return {std::cos(theta), std::sin(theta)}; }
inline Vec2 unit_perp(double theta) { return {-std::sin(theta), std::cos(theta)}; }

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDefaultRhoFloor = 1e-8;

/// Periodic samples of a planar support function on the grid theta_j = 2*pi*j/N.
///
/// N must be even and at least 16 so that the antipodal direction of a grid
/// angle is again a grid angle (index shift by N/2).
class SupportFunction {
 public:
  explicit SupportFunction(std::vector<double> samples);

  static SupportFunction from_function(std::size_t n_theta,
                                       const std::function<double(double)>& h);

  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t j) const { return samples_[j]; }
  std::span<const double> samples() const { return samples_; }
  double theta(std::size_t j) const { return kTwoPi * double(j) / double(size()); }
  double dtheta() const { return kTwoPi / double(size()); }
  std::size_t antipode(std::size_t j) const { return (j + size() / 2) % size(); }

  double min() const;
  double max() const;

 private:
  std::vector<double> samples_;
};

/// Support function of the disk of radius r centred at c.
SupportFunction disk_support(std::size_t n_theta, double r, Vec2 c = {});

/// Support function of the centred ellipse with semi-axes a (along x) and b.
SupportFunction ellipse_support(std::size_t n_theta, double a, double b);

SupportFunction scaled(const SupportFunction& h, double lambda);

/// Support function of the body translated by v: h(x) + <v, x>.
SupportFunction translated(const SupportFunction& h, Vec2 v);

struct Derivatives {
  std::vector<double> dh;
  std::vector<double> d2h;
};

/// Periodic first and second angular derivatives.
///
/// Five-point centred stencils, fourth-order accurate, with weights fitted so
/// that the trigonometric modes 1, cos, sin, cos 2, sin 2 are differentiated
/// exactly.
Derivatives differentiate(const SupportFunction& h);

/// Magnitude of the most negative eigenvalue of the second-derivative stencil
/// on a grid of n_theta points (the alternating mode).
double second_derivative_spectral_radius(std::size_t n_theta);

struct ConvexBody {
  SupportFunction h;
  std::vector<double> dh;
  std::vector<double> d2h;
  /// X_j = h_j x(theta_j) + h'_j x_perp(theta_j), the inverse Gauss map.
  std::vector<Vec2> boundary;
  /// Curvature radii h'' + h.
  std::vector<double> rho;
  /// |X_j| and the polar angle of X_j.
  std::vector<double> radial;
  std::vector<double> polar_angle;
  double width_minus = 0.0;
  double width_plus = 0.0;
  double diameter = 0.0;

  std::size_t size() const { return h.size(); }
  double min_rho() const;
  double max_rho() const;
};

/// Rebuilds the body from its support function.
///
/// Throws NonPositive when min h <= 0 (origin not interior) and NonConvex when
/// some curvature radius falls to rho_floor or below.
ConvexBody build_body(const SupportFunction& h, double rho_floor = kDefaultRhoFloor);

/// Antipodal average (h(x) + h(-x)) / 2.
SupportFunction even_project(const SupportFunction& h);

/// Support function of h0 + t*h1 (Minkowski combination).
SupportFunction minkowski_combine(const SupportFunction& h0, const SupportFunction& h1,
                                  double t);

}  // namespace torsionflow
