#include "blochscat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace blochscat {

namespace {

double wrap_to_cell(double x1) {
  double w = std::remainder(x1, 2.0 * M_PI);  // [-pi, pi]
  if (w >= M_PI) w -= 2.0 * M_PI;
  return w;
}

}  // namespace

StripMesh generate_strip_mesh(const PeriodicSurface& surface, int n1, int n2) {
  if (n1 < 8 || n1 % 2 != 0)
    throw std::invalid_argument("generate_strip_mesh: n1 must be even and >= 8");
  if (n2 < 4) throw std::invalid_argument("generate_strip_mesh: n2 must be >= 4");
  surface.validate();

  StripMesh mesh;
  mesh.surface = surface;
  mesh.n1 = n1;
  mesh.n2 = n2;

  const double H = surface.H;
  const double dx = 2.0 * M_PI / n1;
  const int nv = (n1 + 1) * (n2 + 1);
  mesh.vertices.resize(nv);
  mesh.node_class.resize(nv);
  mesh.dof_map.assign(nv, -1);
  mesh.dirichlet_index.assign(nv, -1);

  std::vector<double> zeta(n1 + 1);
  for (int i = 0; i < n1; ++i) zeta[i] = surface.height(-M_PI + i * dx);
  zeta[n1] = zeta[0];  // identical x2 on the left and right boundaries

  for (int j = 0; j <= n2; ++j) {
    double t = double(j) / n2;
    for (int i = 0; i <= n1; ++i) {
      int v = mesh.vertex_id(i, j);
      double x1 = (i == n1) ? M_PI : -M_PI + i * dx;
      double x2 = (j == n2) ? H : zeta[i] + t * (H - zeta[i]);
      mesh.vertices[v] = {x1, x2};
      if (j == 0)
        mesh.node_class[v] = NodeClass::DirichletSurface;
      else if (i == n1)
        mesh.node_class[v] = NodeClass::PeriodicSlave;
      else if (j == n2)
        mesh.node_class[v] = NodeClass::TopBoundary;
      else
        mesh.node_class[v] = NodeClass::Interior;
    }
  }

  // Dofs: rows 1..n2, columns 0..n1-1; top boundary dofs come last.
  for (int j = 1; j <= n2; ++j)
    for (int i = 0; i < n1; ++i)
      mesh.dof_map[mesh.vertex_id(i, j)] = long(j - 1) * n1 + i;
  for (int j = 1; j <= n2; ++j)  // slaves share the left-edge dof
    mesh.dof_map[mesh.vertex_id(n1, j)] = mesh.dof_map[mesh.vertex_id(0, j)];
  for (int i = 0; i <= n1; ++i)  // the right-edge corner shares slot 0
    mesh.dirichlet_index[mesh.vertex_id(i, 0)] = (i == n1) ? 0 : i;
  mesh.num_dofs = long(n1) * n2;
  mesh.num_dirichlet = n1;

  for (int i = 0; i < n1; ++i) mesh.top_nodes.push_back(mesh.vertex_id(i, n2));

  mesh.triangles.reserve(2L * n1 * n2);
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      int v00 = mesh.vertex_id(i, j), v10 = mesh.vertex_id(i + 1, j);
      int v01 = mesh.vertex_id(i, j + 1), v11 = mesh.vertex_id(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }

  double max_edge = 0.0;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      double len =
          (mesh.vertices[tri[e]] - mesh.vertices[tri[(e + 1) % 3]]).norm();
      max_edge = std::max(max_edge, len);
    }
  }
  mesh.mesh_width = max_edge;
  return mesh;
}

std::complex<double> NodalField::vertex_value(int v) const {
  if (mesh->dof_map[v] >= 0) return dofs[mesh->dof_map[v]];
  return dirichlet[mesh->dirichlet_index[v]];
}

std::complex<double> interpolate(const StripMesh& mesh, const NodalField& field,
                                 double x1, double x2) {
  double x = wrap_to_cell(x1);
  const int n1 = mesh.n1, n2 = mesh.n2;
  const double dx = 2.0 * M_PI / n1;
  int i = std::clamp(int(std::floor((x + M_PI) / dx)), 0, n1 - 1);

  // Chord height of this column: the mesh bottom is the piecewise-linear
  // interpolant of the surface, so bounds are checked against the chord.
  double s = (x + M_PI) / dx - i;
  double zl = mesh.vertices[mesh.vertex_id(i, 0)].y();
  double zr = mesh.vertices[mesh.vertex_id(i + 1, 0)].y();
  double zc = zl + s * (zr - zl);
  if (x2 > mesh.surface.H + 1e-12 || x2 < zc - 1e-12)
    throw std::invalid_argument("interpolate: point outside the strip");
  double t = (x2 - zc) / (mesh.surface.H - zc);
  int j0 = std::clamp(int(std::floor(t * n2)), 0, n2 - 1);

  double best_defect = std::numeric_limits<double>::infinity();
  std::complex<double> best_value{0.0, 0.0};
  for (int dj : {0, -1, 1}) {
    int j = j0 + dj;
    if (j < 0 || j >= n2) continue;
    for (int half = 0; half < 2; ++half) {
      const auto& tri = mesh.triangles[2L * (long(j) * n1 + i) + half];
      Eigen::Vector2d a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]],
                      c = mesh.vertices[tri[2]];
      double det = (b.x() - a.x()) * (c.y() - a.y()) -
                   (c.x() - a.x()) * (b.y() - a.y());
      double l1 = ((x - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (x2 - a.y())) / det;
      double l2 = ((b.x() - a.x()) * (x2 - a.y()) - (x - a.x()) * (b.y() - a.y())) / det;
      double l0 = 1.0 - l1 - l2;
      double defect = -std::min({l0, l1, l2, 0.0});
      if (defect < best_defect) {
        best_defect = defect;
        double c0 = std::clamp(l0, 0.0, 1.0), c1 = std::clamp(l1, 0.0, 1.0),
               c2 = std::clamp(l2, 0.0, 1.0);
        double cs = c0 + c1 + c2;
        best_value = (c0 * field.vertex_value(tri[0]) +
                      c1 * field.vertex_value(tri[1]) +
                      c2 * field.vertex_value(tri[2])) /
                     cs;
      }
      if (best_defect == 0.0) return best_value;
    }
  }
  if (best_defect > 1e-9)
    throw std::invalid_argument("interpolate: point not located in the mesh");
  return best_value;
}

void dump_mesh(const StripMesh& mesh, std::ostream& os) {
  static const char* names[] = {"interior", "top", "dirichlet", "slave"};
  os << "vertices " << mesh.vertices.size() << "\n";
  os.precision(17);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    os << mesh.vertices[v].x() << " " << mesh.vertices[v].y() << " "
       << names[int(mesh.node_class[v])] << "\n";
  os << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& tri : mesh.triangles)
    os << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
}

double max_edge_estimate(const PeriodicSurface& surface, int n1, int n2) {
  const double H = surface.H;
  const double dx = 2.0 * M_PI / n1;
  double max_edge = 0.0;
  double zl = surface.height(-M_PI);
  for (int i = 0; i < n1; ++i) {
    double zr = (i == n1 - 1) ? surface.height(-M_PI) : surface.height(-M_PI + (i + 1) * dx);
    double dz = zr - zl;
    // Vertical edges of this column.
    max_edge = std::max(max_edge, (H - zl) / n2);
    // Horizontal edges, longest at the bottom row (t = 0).
    max_edge = std::max(max_edge, std::hypot(dx, dz));
    // Diagonal v00 -> v11; its rise is affine in the row index.
    for (int j : {0, n2 - 1}) {
      double t0 = double(j) / n2, t1 = double(j + 1) / n2;
      double rise = (zr + t1 * (H - zr)) - (zl + t0 * (H - zl));
      max_edge = std::max(max_edge, std::hypot(dx, rise));
    }
    zl = zr;
  }
  return max_edge;
}

std::pair<int, int> choose_grid(const PeriodicSurface& surface, double eps_target) {
  if (!(eps_target > 0.0))
    throw std::invalid_argument("choose_grid: eps_target must be positive");
  double max_slope = 0.0;
  for (int i = 0; i < 4096; ++i)
    max_slope = std::max(max_slope, std::abs(surface.slope(-M_PI + i * M_PI / 2048)));
  int n1_min = int(std::ceil(2.0 * M_PI * std::sqrt(1.0 + max_slope * max_slope) /
                             eps_target));
  n1_min = std::max(8, n1_min + (n1_min % 2));

  auto min_n2_for = [&](int n1) -> int {
    int lo = 4, hi = 4;
    while (max_edge_estimate(surface, n1, hi) > eps_target) {
      hi *= 2;
      if (hi > (1 << 22)) return -1;
    }
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      if (max_edge_estimate(surface, n1, mid) <= eps_target)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  };

  long best_cost = std::numeric_limits<long>::max();
  std::pair<int, int> best{0, 0};
  for (int n1 = n1_min; n1 <= 3 * n1_min; n1 += 2) {
    int n2 = min_n2_for(n1);
    if (n2 < 0) continue;
    long cost = long(n1) * n2;
    if (cost < best_cost) {
      best_cost = cost;
      best = {n1, n2};
    }
    if (long(n1) * 4 > best_cost) break;  // n2 >= 4 always; no better beyond
  }
  if (best.first == 0) throw std::runtime_error("choose_grid: target unreachable");
  return best;
}

}  // namespace blochscat
