#pragma once

#include <array>
#include <span>
#include <vector>

#include "torsionflow/geometry.hpp"

namespace torsionflow {

class DegenerateTriangle : public Error {
 public:
  DegenerateTriangle(std::size_t triangle, double area);
};

class SolverDiverged : public Error {
 public:
  SolverDiverged(int iterations, double residual);
  int iterations;
  double residual;
};

/// Radial fan triangulation of a star-shaped body anchored at the origin.
///
/// Node 0 is the centre; ring i = 1..M holds node (i, j) = (i/M) X_j at index
/// 1 + (i-1) N + j. The outermost ring consists of the boundary points X_j.
/// Quad diagonals alternate in a checkerboard so that the mesh is symmetric
/// under reflection about every grid ray; with N divisible by 4 it inherits
/// all reflection symmetries of the angular grid.
struct FanMesh {
  std::size_t n_theta = 0;
  std::size_t n_radial = 0;
  std::vector<Vec2> nodes;
  std::vector<std::array<std::size_t, 3>> triangles;
  std::vector<double> areas;

  std::size_t node(std::size_t ring, std::size_t j) const {
    return ring == 0 ? 0 : 1 + (ring - 1) * n_theta + j % n_theta;
  }
  std::size_t boundary_node(std::size_t j) const { return node(n_radial, j); }
  /// Unknowns are the nodes preceding the boundary ring.
  std::size_t interior_count() const { return 1 + (n_radial - 1) * n_theta; }
  double total_area() const;
};

inline constexpr std::size_t kDefaultRadial = 32;

FanMesh build_mesh(const ConvexBody& body, std::size_t n_radial = kDefaultRadial);

struct SolverOptions {
  double relative_tolerance = 1e-10;
  /// Iteration cap as a multiple of the unknown count.
  int iteration_factor = 20;
};

struct BoundaryGradient {
  /// Consistent-flux recovery of |grad U| at each boundary node, with a 1-2-1
  /// filter on the nodal flux.
  std::vector<double> q;
  /// Area-weighted average of adjacent element gradient magnitudes.
  std::vector<double> q_fallback;
  /// Area-weighted average element gradient vector at each boundary node.
  std::vector<Vec2> gradient;
  double max_deviation = 0.0;
};

struct TorsionSolution {
  FanMesh mesh;
  std::vector<double> U;
  std::vector<double> q;
  std::vector<double> q_fallback;
  std::vector<Vec2> boundary_gradient;
  double q_max_deviation = 0.0;
  double T_volume = 0.0;
  double T_work = 0.0;
  double T_boundary = 0.0;
  int cg_iterations = 0;
  double cg_residual = 0.0;

  /// Exact solution on the body scaled by lambda: U -> lambda^2 U on the
  /// scaled mesh, gradients by lambda, every T by lambda^4.
  TorsionSolution scaled(double lambda) const;
};

/// P1 finite-element solution of Delta U = -2 with U = 0 on the boundary.
///
/// `warm_start`, when non-empty, gives initial values for the interior
/// unknowns. Throws SolverDiverged if CG exhausts its iteration cap.
TorsionSolution solve_torsion(const ConvexBody& body, const FanMesh& mesh,
                              const SolverOptions& options = {},
                              std::span<const double> warm_start = {});

TorsionSolution solve_torsion(const ConvexBody& body, std::size_t n_radial = kDefaultRadial);

BoundaryGradient boundary_gradient(const FanMesh& mesh, std::span<const double> U);

/// (1/4) sum_j h_j q_j^2 rho_j dtheta, the boundary form of T.
double boundary_rigidity(const ConvexBody& body, std::span<const double> q);

/// Density of the torsional measure against dtheta: q_j^2 rho_j.
std::vector<double> torsional_measure_density(const ConvexBody& body,
                                              const TorsionSolution& solution);

/// Sum_j h1_j q0_j^2 rho0_j dtheta, the first variation of T in direction h1.
double variational_derivative(const ConvexBody& body0, const SupportFunction& h1,
                              const TorsionSolution& solution0);

}  // namespace torsionflow
