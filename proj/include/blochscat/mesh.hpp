#ifndef BLOCHSCAT_MESH_HPP
#define BLOCHSCAT_MESH_HPP

#include <Eigen/Core>
#include <array>
#include <complex>
#include <iosfwd>
#include <vector>

#include "blochscat/geometry.hpp"

namespace blochscat {

enum class NodeClass { Interior, TopBoundary, DirichletSurface, PeriodicSlave };

// Structured periodic triangulation of the cell Omega_H^{2pi}: a tensor grid
// on [-pi,pi] x [0,1] mapped by (s,t) -> (s, zeta(s) + t (H - zeta(s))),
// each quad split into two triangles. Vertex (i,j) = column i (x1), row j
// (bottom to top); linear index j*(n1+1)+i. Degrees of freedom are all
// vertices except the Dirichlet bottom row and the periodic slave column
// x1 = +pi; dof = (j-1)*n1 + i, so the top-boundary dofs are the trailing
// n1 entries.
struct StripMesh {
  PeriodicSurface surface;
  int n1 = 0, n2 = 0;
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;  // positively oriented
  std::vector<NodeClass> node_class;
  std::vector<long> dof_map;          // vertex -> dof, -1 for none
  std::vector<long> dirichlet_index;  // vertex -> Dirichlet slot, -1 for none
  std::vector<int> top_nodes;         // TopBoundary vertices, ascending x1
  double mesh_width = 0.0;            // max edge length (the paper's epsilon)
  long num_dofs = 0;
  long num_dirichlet = 0;

  int vertex_id(int i, int j) const { return j * (n1 + 1) + i; }
};

StripMesh generate_strip_mesh(const PeriodicSurface& surface, int n1, int n2);

// P1 nodal field: one complex value per dof plus the Dirichlet trace values.
struct NodalField {
  const StripMesh* mesh = nullptr;
  Eigen::VectorXcd dofs;
  Eigen::VectorXcd dirichlet;

  std::complex<double> vertex_value(int v) const;
};

// Barycentric-linear evaluation; x1 is wrapped into [-pi, pi) first.
// Throws if the point lies outside the closed strip.
std::complex<double> interpolate(const StripMesh& mesh, const NodalField& field,
                                 double x1, double x2);

// Plain-text dump: "vertices N", N lines "x1 x2 class", "triangles M", triples.
void dump_mesh(const StripMesh& mesh, std::ostream& os);

// Max edge length of the would-be mesh, computed without building it.
double max_edge_estimate(const PeriodicSurface& surface, int n1, int n2);

// Smallest (n1, n2) (n1 even) with max edge <= eps_target, minimizing n1*n2.
std::pair<int, int> choose_grid(const PeriodicSurface& surface, double eps_target);

}  // namespace blochscat

#endif  // BLOCHSCAT_MESH_HPP
