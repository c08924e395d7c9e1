#include "torsionflow/torsion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace torsionflow {

namespace {

// Element gradients of the three P1 hat functions.
std::array<Vec2, 3> hat_gradients(const Vec2& p0, const Vec2& p1, const Vec2& p2, double area) {
  const double s = 1.0 / (2.0 * area);
  return {Vec2{s * (p1.y - p2.y), s * (p2.x - p1.x)},
          Vec2{s * (p2.y - p0.y), s * (p0.x - p2.x)},
          Vec2{s * (p0.y - p1.y), s * (p1.x - p0.x)}};
}

// Compressed sparse row matrix over the interior unknowns.
struct CsrMatrix {
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> col;
  std::vector<double> val;

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r + 1 < row_start.size(); ++r) {
      double acc = 0.0;
      for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) acc += val[k] * x[col[k]];
      y[r] = acc;
    }
  }
};

struct Entry {
  std::size_t row, col;
  double value;
};

CsrMatrix assemble_interior(const FanMesh& mesh, std::vector<double>& load) {
  const std::size_t n = mesh.interior_count();
  std::vector<Entry> entries;
  entries.reserve(mesh.triangles.size() * 9);
  load.assign(n, 0.0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.areas[t];
    const auto g = hat_gradients(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]], area);
    for (int a = 0; a < 3; ++a) {
      if (tri[a] >= n) continue;
      load[tri[a]] += 2.0 * area / 3.0;
      for (int b = 0; b < 3; ++b)
        if (tri[b] < n) entries.push_back({tri[a], tri[b], area * dot(g[a], g[b])});
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  CsrMatrix m;
  m.row_start.assign(n + 1, 0);
  for (std::size_t k = 0; k < entries.size();) {
    const std::size_t r = entries[k].row, c = entries[k].col;
    double sum = 0.0;
    for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k)
      sum += entries[k].value;
    m.col.push_back(c);
    m.val.push_back(sum);
    ++m.row_start[r + 1];
  }
  for (std::size_t r = 0; r < n; ++r) m.row_start[r + 1] += m.row_start[r];
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct CgResult {
  int iterations;
  double residual;
  bool converged;
};

// Jacobi-preconditioned conjugate gradients.
CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                            double tol, int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> diag(n, 1.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = a.row_start[r]; k < a.row_start[r + 1]; ++k)
      if (a.col[k] == r) diag[r] = a.val[k];

  std::vector<double> r(n), z(n), p(n), ap(n);
  a.multiply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0, true};
  }
  double rnorm = std::sqrt(dot(r, r));
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (rnorm > tol * bnorm) {
    if (it >= max_iter) return {it, rnorm / bnorm, false};
    a.multiply(p, ap);
    const double alpha = rz / dot(p, ap);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = std::sqrt(dot(r, r));
    ++it;
  }
  a.multiply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  return {it, std::sqrt(dot(r, r)) / bnorm, true};
}

}  // namespace

DegenerateTriangle::DegenerateTriangle(std::size_t triangle, double area)
    : Error("degenerate triangle " + std::to_string(triangle) +
            " with signed area " + std::to_string(area)) {}

SolverDiverged::SolverDiverged(int it, double res)
    : Error("conjugate gradients did not converge: " + std::to_string(it) +
            " iterations, relative residual " + std::to_string(res)),
      iterations(it),
      residual(res) {}

double FanMesh::total_area() const {
  double s = 0.0;
  for (double a : areas) s += a;
  return s;
}

FanMesh build_mesh(const ConvexBody& body, std::size_t n_radial) {
  if (n_radial < 8) throw InvalidGrid("fan mesh needs at least 8 radial layers");
  if (body.h.min() <= 0.0) throw NonPositive(body.h.min(), 0);
  const std::size_t n = body.size();
  FanMesh mesh;
  mesh.n_theta = n;
  mesh.n_radial = n_radial;
  mesh.nodes.reserve(1 + n * n_radial);
  mesh.nodes.push_back({0.0, 0.0});
  for (std::size_t i = 1; i <= n_radial; ++i)
    for (std::size_t j = 0; j < n; ++j)
      mesh.nodes.push_back((double(i) / double(n_radial)) * body.boundary[j]);

  auto add = [&](std::size_t a, std::size_t b, std::size_t c) {
    const double area = 0.5 * cross(mesh.nodes[b] - mesh.nodes[a], mesh.nodes[c] - mesh.nodes[a]);
    if (!(area > 0.0)) throw DegenerateTriangle(mesh.triangles.size(), area);
    mesh.triangles.push_back({a, b, c});
    mesh.areas.push_back(area);
  };

  for (std::size_t j = 0; j < n; ++j) add(0, mesh.node(1, j), mesh.node(1, j + 1));
  for (std::size_t i = 1; i < n_radial; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = mesh.node(i, j), b = mesh.node(i + 1, j);
      const std::size_t c = mesh.node(i + 1, j + 1), d = mesh.node(i, j + 1);
      // Checkerboard diagonals: mirror-symmetric about every grid ray.
      const bool forward = (i + j) % 2 == 0;
      if (forward) {
        add(a, b, c);
        add(a, c, d);
      } else {
        add(a, b, d);
        add(b, c, d);
      }
    }
  }
  return mesh;
}

BoundaryGradient boundary_gradient(const FanMesh& mesh, std::span<const double> U) {
  const std::size_t n = mesh.n_theta;
  const std::size_t first = mesh.boundary_node(0);
  std::vector<double> flux(n, 0.0), weight(n, 0.0), mag(n, 0.0);
  std::vector<Vec2> grad(n);

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    if (std::none_of(tri.begin(), tri.end(), [&](std::size_t v) { return v >= first; })) continue;
    const double area = mesh.areas[t];
    const auto g = hat_gradients(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]], area);
    const Vec2 gu = U[tri[0]] * g[0] + U[tri[1]] * g[1] + U[tri[2]] * g[2];
    for (int a = 0; a < 3; ++a) {
      if (tri[a] < first) continue;
      const std::size_t j = tri[a] - first;
      // Row of the unconstrained residual K U - F.
      flux[j] += area * dot(g[a], gu) - 2.0 * area / 3.0;
      weight[j] += area;
      mag[j] += area * norm(gu);
      grad[j] = grad[j] + area * gu;
    }
  }

  // The alternating diagonals leave a node-to-node oscillation in the
  // recovered flux; a 1-2-1 filter removes that mode and keeps the total.
  std::vector<double> smooth(n);
  for (std::size_t j = 0; j < n; ++j)
    smooth[j] = 0.25 * flux[(j + n - 1) % n] + 0.5 * flux[j] + 0.25 * flux[(j + 1) % n];

  BoundaryGradient out;
  out.q.resize(n);
  out.q_fallback.resize(n);
  out.gradient.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 prev = mesh.nodes[mesh.boundary_node(j + n - 1)];
    const Vec2 here = mesh.nodes[mesh.boundary_node(j)];
    const Vec2 next = mesh.nodes[mesh.boundary_node(j + 1)];
    const double w = 0.5 * (norm(here - prev) + norm(next - here));
    out.q[j] = -smooth[j] / w;
    out.q_fallback[j] = mag[j] / weight[j];
    out.gradient[j] = (1.0 / weight[j]) * grad[j];
    out.max_deviation = std::max(out.max_deviation, std::abs(out.q[j] - out.q_fallback[j]));
  }
  return out;
}

TorsionSolution solve_torsion(const ConvexBody& body, const FanMesh& mesh,
                              const SolverOptions& options, std::span<const double> warm_start) {
  if (mesh.n_theta != body.size()) throw GridMismatch(mesh.n_theta, body.size());
  std::vector<double> load;
  const CsrMatrix k = assemble_interior(mesh, load);
  const std::size_t n_int = mesh.interior_count();

  std::vector<double> x(n_int, 0.0);
  if (warm_start.size() >= n_int) std::copy_n(warm_start.begin(), n_int, x.begin());
  const int cap = options.iteration_factor * int(n_int);
  const CgResult cg = conjugate_gradient(k, load, x, options.relative_tolerance, cap);
  if (!cg.converged) throw SolverDiverged(cg.iterations, cg.residual);

  TorsionSolution sol;
  sol.mesh = mesh;
  sol.U.assign(mesh.nodes.size(), 0.0);
  std::copy(x.begin(), x.end(), sol.U.begin());
  sol.cg_iterations = cg.iterations;
  sol.cg_residual = cg.residual;

  double energy = 0.0, work = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.areas[t];
    const auto g = hat_gradients(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]], area);
    const Vec2 gu = sol.U[tri[0]] * g[0] + sol.U[tri[1]] * g[1] + sol.U[tri[2]] * g[2];
    energy += area * dot(gu, gu);
    work += 2.0 * area * (sol.U[tri[0]] + sol.U[tri[1]] + sol.U[tri[2]]) / 3.0;
  }
  sol.T_volume = energy;
  sol.T_work = work;

  BoundaryGradient bg = boundary_gradient(mesh, sol.U);
  sol.q = std::move(bg.q);
  sol.q_fallback = std::move(bg.q_fallback);
  sol.boundary_gradient = std::move(bg.gradient);
  sol.q_max_deviation = bg.max_deviation;
  sol.T_boundary = boundary_rigidity(body, sol.q);
  return sol;
}

TorsionSolution solve_torsion(const ConvexBody& body, std::size_t n_radial) {
  return solve_torsion(body, build_mesh(body, n_radial));
}

TorsionSolution TorsionSolution::scaled(double lambda) const {
  TorsionSolution s = *this;
  for (Vec2& p : s.mesh.nodes) p = lambda * p;
  for (double& a : s.mesh.areas) a *= lambda * lambda;
  const double l2 = lambda * lambda, l4 = l2 * l2;
  for (double& u : s.U) u *= l2;
  for (double& v : s.q) v *= lambda;
  for (double& v : s.q_fallback) v *= lambda;
  for (Vec2& g : s.boundary_gradient) g = lambda * g;
  s.q_max_deviation *= lambda;
  s.T_volume *= l4;
  s.T_work *= l4;
  s.T_boundary *= l4;
  return s;
}

double boundary_rigidity(const ConvexBody& body, std::span<const double> q) {
  if (q.size() != body.size()) throw GridMismatch(q.size(), body.size());
  double s = 0.0;
  for (std::size_t j = 0; j < body.size(); ++j) s += body.h[j] * q[j] * q[j] * body.rho[j];
  return 0.25 * s * body.h.dtheta();
}

std::vector<double> torsional_measure_density(const ConvexBody& body,
                                              const TorsionSolution& solution) {
  if (solution.q.size() != body.size()) throw GridMismatch(solution.q.size(), body.size());
  std::vector<double> m(body.size());
  for (std::size_t j = 0; j < m.size(); ++j) m[j] = solution.q[j] * solution.q[j] * body.rho[j];
  return m;
}

double variational_derivative(const ConvexBody& body0, const SupportFunction& h1,
                              const TorsionSolution& solution0) {
  if (h1.size() != body0.size()) throw GridMismatch(body0.size(), h1.size());
  const std::vector<double> m = torsional_measure_density(body0, solution0);
  double s = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) s += h1[j] * m[j];
  return s * body0.h.dtheta();
}

}  // namespace torsionflow
