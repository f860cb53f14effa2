#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "curveseg/curve.hpp"
#include "curveseg/geometry.hpp"
#include "curveseg/vec.hpp"

namespace curveseg {

// Orthogonal projector onto the constrained displacement space: the three
// endpoints of a junction move as one, and wall-bound endpoints lose their
// wall-normal component. Node indices are global (curve offset + local).
struct ConstraintProjector {
  std::vector<std::array<int, 3>> junction_triples;
  std::vector<std::pair<int, Vec2>> wall_nodes;  // index, unit wall normal

  void apply(std::vector<Vec2>& z) const;
};

ConstraintProjector build_projector(const CurveNetwork& net,
                                    const std::vector<int>& offsets);

// One assembled time step of the network evolution. The displacement
// solve eliminates curvature from the coupled system; kappa is recovered
// afterwards from the identity sigma*tau*kappa = omega.delta - tau*F.
struct StepSystem {
  double sigma = 0.0;
  double tau = 0.0;
  int n_nodes = 0;
  std::vector<int> offsets;  // per curve, size n_curves + 1
  std::vector<char> closed;  // per curve

  std::vector<double> mass;    // lumped vertex weights
  std::vector<Vec2> omega;     // vertex normals
  std::vector<double> force;   // external forcing at vertices
  std::vector<std::vector<double>> inv_len;  // 1/h per edge, per curve

  ConstraintProjector projector;
  std::vector<Eigen::Matrix2d> precond_blocks;  // inverted 2x2 diagonal blocks

  // y = A z, the arc-length stiffness operator (no constraints).
  void apply_stiffness(const std::vector<Vec2>& z, std::vector<Vec2>& y) const;
  // y = P (A + 1/(sigma tau) N M^-1 N^T) P z.
  void apply_schur(const std::vector<Vec2>& z, std::vector<Vec2>& y) const;
  // z = P D^-1 P r with the block-Jacobi diagonal.
  void apply_precond(const std::vector<Vec2>& r, std::vector<Vec2>& z) const;
  // P ((1/sigma) N M^-1 b - A X) for the current node positions.
  std::vector<Vec2> right_hand_side(const CurveNetwork& net) const;
};

StepSystem assemble(const CurveNetwork& net, const DiscreteGeometry& geom,
                    const std::vector<std::vector<double>>& node_force,
                    double sigma, double tau);

struct StepResult {
  std::vector<std::vector<Vec2>> delta;    // displacement per curve node
  std::vector<std::vector<double>> kappa;  // recovered curvature
  double max_displacement = 0.0;           // max euclidean node move
  int iterations = 0;
  double rel_residual = 0.0;
};

StepResult solve_step(const StepSystem& sys, const CurveNetwork& net,
                      double rel_tol = 1e-10, int max_iter_per_node = 20);

// Moves nodes by delta, re-fuses junction triples to their mean (throwing
// InvariantViolation if they spread farther than tol_attach), and snaps
// wall-bound endpoints back onto their wall exactly.
void apply_step(CurveNetwork& net, const std::vector<std::vector<Vec2>>& delta,
                double tol_attach = 1e-8);

}  // namespace curveseg
