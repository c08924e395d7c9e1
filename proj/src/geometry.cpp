#include "torsionflow/geometry.hpp"

#include <algorithm>
#include <string>

namespace torsionflow {

namespace {

std::string describe(const char* what, double value, std::size_t index) {
  return std::string(what) + " " + std::to_string(value) + " at index " + std::to_string(index);
}

// Weights of the symmetric stencils
//   d2: w0 f_j + w1 (f_{j+1} + f_{j-1}) + w2 (f_{j+2} + f_{j-2})
//   d1: a1 (f_{j+1} - f_{j-1}) + a2 (f_{j+2} - f_{j-2})
// solved in closed form from exactness on modes 0, 1, 2.
struct Stencil {
  double w0, w1, w2;
  double a1, a2;
};

Stencil fitted_stencil(double d) {
  const double s = std::sin(0.5 * d);
  const double s1 = std::sin(d);
  const double s2 = std::sin(2.0 * d);
  const double s3h = std::sin(1.5 * d);
  Stencil st{};
  st.w1 = s1 * s1 / (4.0 * s * s * s * s3h);
  st.w2 = -s / (4.0 * s1 * s1 * s3h);
  st.w0 = -2.0 * (st.w1 + st.w2);
  st.a1 = s1 / (2.0 * s * s3h);
  st.a2 = -s / (2.0 * s2 * s3h);
  return st;
}

}  // namespace

GridMismatch::GridMismatch(std::size_t a, std::size_t b)
    : Error("grid mismatch: " + std::to_string(a) + " vs " + std::to_string(b) + " samples") {}

NonPositive::NonPositive(double m, std::size_t i)
    : Error(describe("support function not positive: min h =", m, i)), min_h(m), index(i) {}

NonConvex::NonConvex(double m, std::size_t i)
    : Error(describe("body lost uniform convexity: min rho =", m, i)), min_rho(m), index(i) {}

SupportFunction::SupportFunction(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 16 || samples_.size() % 2 != 0)
    throw InvalidGrid("support function grid must be even and >= 16, got " +
                      std::to_string(samples_.size()));
  for (std::size_t j = 0; j < samples_.size(); ++j)
    if (!std::isfinite(samples_[j]))
      throw InvalidGrid("non-finite support sample at index " + std::to_string(j));
}

SupportFunction SupportFunction::from_function(std::size_t n_theta,
                                               const std::function<double(double)>& h) {
  std::vector<double> s(n_theta);
  for (std::size_t j = 0; j < n_theta; ++j) s[j] = h(kTwoPi * double(j) / double(n_theta));
  return SupportFunction(std::move(s));
}

double SupportFunction::min() const { return *std::min_element(samples_.begin(), samples_.end()); }
double SupportFunction::max() const { return *std::max_element(samples_.begin(), samples_.end()); }

SupportFunction disk_support(std::size_t n_theta, double r, Vec2 c) {
  return SupportFunction::from_function(
      n_theta, [&](double t) { return r + c.x * std::cos(t) + c.y * std::sin(t); });
}

SupportFunction ellipse_support(std::size_t n_theta, double a, double b) {
  return SupportFunction::from_function(n_theta, [&](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return std::sqrt(a * a * c * c + b * b * s * s);
  });
}

SupportFunction scaled(const SupportFunction& h, double lambda) {
  std::vector<double> s(h.samples().begin(), h.samples().end());
  for (double& v : s) v *= lambda;
  return SupportFunction(std::move(s));
}

SupportFunction translated(const SupportFunction& h, Vec2 v) {
  std::vector<double> s(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) s[j] = h[j] + dot(v, unit(h.theta(j)));
  return SupportFunction(std::move(s));
}

Derivatives differentiate(const SupportFunction& h) {
  const std::size_t n = h.size();
  const Stencil st = fitted_stencil(h.dtheta());
  Derivatives d{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    const double fm2 = h[(j + n - 2) % n];
    const double fm1 = h[(j + n - 1) % n];
    const double fp1 = h[(j + 1) % n];
    const double fp2 = h[(j + 2) % n];
    d.dh[j] = st.a1 * (fp1 - fm1) + st.a2 * (fp2 - fm2);
    d.d2h[j] = st.w0 * h[j] + st.w1 * (fp1 + fm1) + st.w2 * (fp2 + fm2);
  }
  return d;
}

double second_derivative_spectral_radius(std::size_t n_theta) {
  return 4.0 * fitted_stencil(kTwoPi / double(n_theta)).w1;
}

double ConvexBody::min_rho() const { return *std::min_element(rho.begin(), rho.end()); }
double ConvexBody::max_rho() const { return *std::max_element(rho.begin(), rho.end()); }

ConvexBody build_body(const SupportFunction& h, double rho_floor) {
  const std::size_t n = h.size();
  for (std::size_t j = 0; j < n; ++j)
    if (h[j] <= 0.0) {
      const auto it = std::min_element(h.samples().begin(), h.samples().end());
      throw NonPositive(*it, std::size_t(it - h.samples().begin()));
    }

  Derivatives d = differentiate(h);
  ConvexBody body{h, std::move(d.dh), std::move(d.d2h), {}, {}, {}, {}, 0.0, 0.0, 0.0};
  body.rho.resize(n);
  for (std::size_t j = 0; j < n; ++j) body.rho[j] = body.d2h[j] + h[j];
  const auto worst = std::min_element(body.rho.begin(), body.rho.end());
  if (*worst <= rho_floor) throw NonConvex(*worst, std::size_t(worst - body.rho.begin()));

  body.boundary.resize(n);
  body.radial.resize(n);
  body.polar_angle.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = h.theta(j);
    const Vec2 x = h[j] * unit(t) + body.dh[j] * unit_perp(t);
    body.boundary[j] = x;
    body.radial[j] = norm(x);
    body.polar_angle[j] = std::atan2(x.y, x.x);
  }

  body.width_minus = body.width_plus = h[0] + h[h.antipode(0)];
  for (std::size_t j = 1; j < n; ++j) {
    const double w = h[j] + h[h.antipode(j)];
    body.width_minus = std::min(body.width_minus, w);
    body.width_plus = std::max(body.width_plus, w);
  }

  double diam = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k)
      diam = std::max(diam, norm(body.boundary[i] - body.boundary[k]));
  body.diameter = diam;
  return body;
}

SupportFunction even_project(const SupportFunction& h) {
  std::vector<double> s(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) s[j] = 0.5 * (h[j] + h[h.antipode(j)]);
  return SupportFunction(std::move(s));
}

SupportFunction minkowski_combine(const SupportFunction& h0, const SupportFunction& h1,
                                  double t) {
  if (h0.size() != h1.size()) throw GridMismatch(h0.size(), h1.size());
  std::vector<double> s(h0.size());
  for (std::size_t j = 0; j < h0.size(); ++j) s[j] = h0[j] + t * h1[j];
  return SupportFunction(std::move(s));
}

}  // namespace torsionflow
