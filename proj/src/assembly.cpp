#include "curveseg/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "curveseg/errors.hpp"
#include "curveseg/solver.hpp"

namespace curveseg {

void ConstraintProjector::apply(std::vector<Vec2>& z) const {
  for (const auto& t : junction_triples) {
    const Vec2 mean = (z[t[0]] + z[t[1]] + z[t[2]]) / 3.0;
    z[t[0]] = mean;
    z[t[1]] = mean;
    z[t[2]] = mean;
  }
  for (const auto& [idx, n] : wall_nodes) z[idx] -= z[idx].dot(n) * n;
}

ConstraintProjector build_projector(const CurveNetwork& net,
                                    const std::vector<int>& offsets) {
  ConstraintProjector p;
  auto global = [&](const EndpointRef& ref) {
    return offsets[ref.curve] + net.endpoint_index(ref);
  };
  for (const Junction& j : net.junctions)
    p.junction_triples.push_back(
        {global(j.ends[0]), global(j.ends[1]), global(j.ends[2])});
  for (const BoundaryPoint& bp : net.boundary_points)
    p.wall_nodes.emplace_back(global(bp.end),
                              CurveNetwork::wall_normal(bp.wall));
  return p;
}

void StepSystem::apply_stiffness(const std::vector<Vec2>& z,
                                 std::vector<Vec2>& y) const {
  y.assign(n_nodes, Vec2::Zero());
  for (size_t i = 0; i < inv_len.size(); ++i) {
    const int base = offsets[i];
    const int n = offsets[i + 1] - base;
    const auto& il = inv_len[i];
    const int ne = static_cast<int>(il.size());
    for (int e = 0; e < ne; ++e) {
      const int a = base + e;
      const int b = base + (closed[i] ? (e + 1) % n : e + 1);
      const Vec2 d = il[e] * (z[a] - z[b]);
      y[a] += d;
      y[b] -= d;
    }
  }
}

void StepSystem::apply_schur(const std::vector<Vec2>& z,
                             std::vector<Vec2>& y) const {
  std::vector<Vec2> zp = z;
  projector.apply(zp);
  apply_stiffness(zp, y);
  const double c = 1.0 / (sigma * tau);
  for (int j = 0; j < n_nodes; ++j)
    y[j] += c * mass[j] * omega[j].dot(zp[j]) * omega[j];
  projector.apply(y);
}

void StepSystem::apply_precond(const std::vector<Vec2>& r,
                               std::vector<Vec2>& z) const {
  z = r;
  projector.apply(z);
  for (int j = 0; j < n_nodes; ++j) z[j] = precond_blocks[j] * z[j];
  projector.apply(z);
}

std::vector<Vec2> StepSystem::right_hand_side(const CurveNetwork& net) const {
  std::vector<Vec2> x(n_nodes);
  for (size_t i = 0; i < net.curves.size(); ++i)
    for (int j = 0; j < net.curves[i].node_count(); ++j)
      x[offsets[i] + j] = net.curves[i].nodes[j];
  std::vector<Vec2> rhs;
  apply_stiffness(x, rhs);
  for (int j = 0; j < n_nodes; ++j)
    rhs[j] = (mass[j] * force[j] / sigma) * omega[j] - rhs[j];
  projector.apply(rhs);
  return rhs;
}

StepSystem assemble(const CurveNetwork& net, const DiscreteGeometry& geom,
                    const std::vector<std::vector<double>>& node_force,
                    double sigma, double tau) {
  if (sigma <= 0.0 || tau <= 0.0)
    throw InvariantViolation("step assembly needs sigma > 0 and tau > 0");
  StepSystem sys;
  sys.sigma = sigma;
  sys.tau = tau;
  sys.offsets.resize(net.curves.size() + 1, 0);
  for (size_t i = 0; i < net.curves.size(); ++i)
    sys.offsets[i + 1] = sys.offsets[i] + net.curves[i].node_count();
  sys.n_nodes = sys.offsets.back();
  sys.closed.resize(net.curves.size());
  sys.mass.assign(sys.n_nodes, 0.0);
  sys.omega.assign(sys.n_nodes, Vec2::Zero());
  sys.force.assign(sys.n_nodes, 0.0);
  sys.inv_len.resize(net.curves.size());

  for (size_t i = 0; i < net.curves.size(); ++i) {
    const Curve& c = net.curves[i];
    const CurveGeometry& g = geom.per_curve[i];
    sys.closed[i] = c.closed ? 1 : 0;
    auto& il = sys.inv_len[i];
    il.resize(g.edge_len.size());
    for (size_t e = 0; e < g.edge_len.size(); ++e) il[e] = 1.0 / g.edge_len[e];
    for (int j = 0; j < c.node_count(); ++j) {
      const int gj = sys.offsets[i] + j;
      double m = 0.0;
      if (c.closed || j > 0) m += 0.5 * g.h_before(c, j);
      if (c.closed || j + 1 < c.node_count()) m += 0.5 * g.h_after(c, j);
      sys.mass[gj] = m;
      sys.omega[gj] = g.vertex_normal[j];
      sys.force[gj] = node_force[i][j];
    }
  }

  sys.projector = build_projector(net, sys.offsets);

  const double c = 1.0 / (sigma * tau);
  sys.precond_blocks.resize(sys.n_nodes);
  for (size_t i = 0; i < net.curves.size(); ++i) {
    const int base = sys.offsets[i];
    const int n = sys.offsets[i + 1] - base;
    const auto& il = sys.inv_len[i];
    for (int j = 0; j < n; ++j) {
      double a_diag = 0.0;
      if (sys.closed[i]) {
        a_diag = il[(j - 1 + n) % n] + il[j % n];
      } else {
        if (j > 0) a_diag += il[j - 1];
        if (j + 1 < n) a_diag += il[j];
      }
      const int gj = base + j;
      Eigen::Matrix2d d = a_diag * Eigen::Matrix2d::Identity() +
                          c * sys.mass[gj] * sys.omega[gj] *
                              sys.omega[gj].transpose();
      sys.precond_blocks[gj] = d.inverse();
    }
  }
  return sys;
}

StepResult solve_step(const StepSystem& sys, const CurveNetwork& net,
                      double rel_tol, int max_iter_per_node) {
  const std::vector<Vec2> rhs = sys.right_hand_side(net);
  std::vector<Vec2> delta;
  const CgResult cg = conjugate_gradient<Vec2>(
      [&](const std::vector<Vec2>& z, std::vector<Vec2>& y) {
        sys.apply_schur(z, y);
      },
      [&](const std::vector<Vec2>& r, std::vector<Vec2>& z) {
        sys.apply_precond(r, z);
      },
      rhs, delta, rel_tol, max_iter_per_node * std::max(sys.n_nodes, 1));
  if (!cg.converged)
    throw SolveFailure("step solve stalled at relative residual " +
                       std::to_string(cg.rel_residual) + " after " +
                       std::to_string(cg.iterations) + " iterations");

  StepResult out;
  out.iterations = cg.iterations;
  out.rel_residual = cg.rel_residual;
  out.delta.resize(net.curves.size());
  out.kappa.resize(net.curves.size());
  const double inv_st = 1.0 / (sys.sigma * sys.tau);
  for (size_t i = 0; i < net.curves.size(); ++i) {
    const int base = sys.offsets[i];
    const int n = sys.offsets[i + 1] - base;
    out.delta[i].resize(n);
    out.kappa[i].resize(n);
    for (int j = 0; j < n; ++j) {
      const Vec2& d = delta[base + j];
      out.delta[i][j] = d;
      out.kappa[i][j] =
          (sys.omega[base + j].dot(d) - sys.tau * sys.force[base + j]) * inv_st;
      out.max_displacement = std::max(out.max_displacement, d.norm());
    }
  }
  return out;
}

void apply_step(CurveNetwork& net, const std::vector<std::vector<Vec2>>& delta,
                double tol_attach) {
  for (size_t i = 0; i < net.curves.size(); ++i)
    for (int j = 0; j < net.curves[i].node_count(); ++j)
      net.curves[i].nodes[j] += delta[i][j];

  for (const Junction& jn : net.junctions) {
    const Vec2 a = net.endpoint(jn.ends[0]);
    const Vec2 b = net.endpoint(jn.ends[1]);
    const Vec2 c = net.endpoint(jn.ends[2]);
    const double spread = std::max({(a - b).norm(), (a - c).norm(),
                                    (b - c).norm()});
    if (spread > tol_attach)
      throw InvariantViolation("junction endpoints drifted apart by " +
                               std::to_string(spread));
    const Vec2 mean = (a + b + c) / 3.0;
    for (const EndpointRef& ref : jn.ends) net.endpoint(ref) = mean;
  }
  for (const BoundaryPoint& bp : net.boundary_points) {
    Vec2& p = net.endpoint(bp.end);
    if (net.wall_distance(p, bp.wall) > tol_attach)
      throw InvariantViolation("wall endpoint drifted off its wall");
    p = net.project_to_wall(p, bp.wall);
  }
}

}  // namespace curveseg
