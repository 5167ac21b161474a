#include "ale2fluid/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ale2fluid/element.hpp"

namespace ale2fluid {

std::string to_string(WallTag tag) {
  switch (tag) {
    case WallTag::Bottom: return "bottom";
    case WallTag::Right: return "right";
    case WallTag::Top: return "top";
    case WallTag::Left: return "left";
  }
  return "?";
}

Vec2 wall_normal(WallTag tag) {
  switch (tag) {
    case WallTag::Bottom: return {0.0, -1.0};
    case WallTag::Right: return {1.0, 0.0};
    case WallTag::Top: return {0.0, 1.0};
    case WallTag::Left: return {-1.0, 0.0};
  }
  return {};
}

bool MeshTopology::has_wall(WallTag tag) const {
  return std::any_of(wall_edges.begin(), wall_edges.end(),
                     [tag](const WallEdge& e) { return e.tag == tag; });
}

std::vector<int> MeshTopology::interface_nodes() const {
  std::vector<int> out;
  for (const auto& [b, e] : chain_ranges) {
    if (e == b) continue;
    out.push_back(interface_edges[b].nodes[0]);
    for (int k = b; k < e; ++k) {
      out.push_back(interface_edges[k].nodes[1]);
      out.push_back(interface_edges[k].nodes[2]);
    }
  }
  return out;
}

Mesh::Mesh(std::shared_ptr<const MeshTopology> topology, std::vector<Vec2> nodes)
    : topology_(std::move(topology)), nodes_(std::move(nodes)) {
  if (!topology_) throw MeshError("mesh without topology");
  if (static_cast<int>(nodes_.size()) != topology_->num_nodes()) {
    throw MeshError("node count does not match topology");
  }
}

std::array<Vec2, 9> Mesh::cell_nodes(int cell) const {
  std::array<Vec2, 9> out;
  const auto& ids = topology_->cells[cell];
  for (int k = 0; k < 9; ++k) out[k] = nodes_[ids[k]];
  return out;
}

MeshTangledError::MeshTangledError(int cell, double min_jacobian)
    : MeshError("mesh tangled: cell " + std::to_string(cell) + " has Jacobian " +
                std::to_string(min_jacobian)),
      cell_(cell),
      min_jacobian_(min_jacobian) {}

namespace {

// Node-index offsets of band boundaries along the motion direction.
std::vector<int> band_offsets(const std::vector<int>& band_cells) {
  std::vector<int> off{0};
  for (int n : band_cells) off.push_back(off.back() + 2 * n);
  return off;
}

int band_of(const std::vector<int>& off, int idx) {
  const int nb = static_cast<int>(off.size()) - 1;
  for (int k = nb - 1; k >= 0; --k) {
    if (idx >= off[k]) return k;
  }
  return 0;
}

}  // namespace

Mesh build_structured_mesh(const StructuredMeshSpec& spec) {
  const int nb = static_cast<int>(spec.band_cells.size());
  if (nb < 1) throw MeshError("at least one band is required");
  if (static_cast<int>(spec.interfaces.size()) != nb - 1) {
    throw MeshError("need one interface curve between consecutive bands");
  }
  if (static_cast<int>(spec.band_region.size()) != nb) {
    throw MeshError("need one region per band");
  }
  if (spec.cross_cells < 1) throw MeshError("cross_cells must be positive");
  for (int n : spec.band_cells) {
    if (n < 1) throw MeshError("every band needs at least one cell");
  }
  for (int r : spec.band_region) {
    if (r != 1 && r != 2) throw MeshError("region must be 1 or 2");
  }
  const Rect& d = spec.domain;
  if (!(d.x1 > d.x0) || !(d.y1 > d.y0)) throw MeshError("empty domain");

  const bool vertical = spec.direction == MotionDirection::Vertical;
  if (spec.periodic && !vertical && spec.band_region.front() != spec.band_region.back()) {
    throw MeshError("periodic seam would cut through an interface");
  }
  const int along = std::accumulate(spec.band_cells.begin(), spec.band_cells.end(), 0);
  const int NX = vertical ? spec.cross_cells : along;
  const int NY = vertical ? along : spec.cross_cells;
  const int NI = 2 * NX + 1;
  const int NJ = 2 * NY + 1;
  const std::vector<int> off = band_offsets(spec.band_cells);

  auto topo = std::make_shared<MeshTopology>();
  topo->nodes_x = NI;
  topo->nodes_y = NJ;
  topo->direction = spec.direction;

  std::vector<Vec2> nodes(static_cast<std::size_t>(NI) * NJ);
  const int n_cross = vertical ? NI : NJ;
  const int n_along = vertical ? NJ : NI;
  const double c0 = vertical ? d.x0 : d.y0;
  const double c1 = vertical ? d.x1 : d.y1;
  const double a0 = vertical ? d.y0 : d.x0;
  const double a1 = vertical ? d.y1 : d.x1;
  for (int ic = 0; ic < n_cross; ++ic) {
    const double c = c0 + (c1 - c0) * ic / (n_cross - 1);
    std::vector<double> level(nb + 1);
    level[0] = a0;
    level[nb] = a1;
    for (int k = 1; k < nb; ++k) level[k] = spec.interfaces[k - 1](c);
    for (int k = 0; k < nb; ++k) {
      if (!(level[k + 1] > level[k])) {
        throw MeshError("interface curve leaves the domain or crosses another curve");
      }
    }
    for (int ia = 0; ia < n_along; ++ia) {
      const int k = band_of(off, ia);
      const double t = double(ia - off[k]) / (off[k + 1] - off[k]);
      const double a = level[k] + (level[k + 1] - level[k]) * t;
      const int i = vertical ? ic : ia;
      const int j = vertical ? ia : ic;
      nodes[j * NI + i] = vertical ? Vec2{c, a} : Vec2{a, c};
    }
  }

  auto cell_id = [NX](int cx, int cy) { return cy * NX + cx; };
  for (int cy = 0; cy < NY; ++cy) {
    for (int cx = 0; cx < NX; ++cx) {
      std::array<int, 9> ids{};
      for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) ids[3 * b + a] = (2 * cy + b) * NI + 2 * cx + a;
      }
      topo->cells.push_back(ids);
      topo->cell_region.push_back(spec.band_region[band_of(off, vertical ? 2 * cy : 2 * cx)]);
    }
  }

  for (int k = 1; k < nb; ++k) {
    const int r_lo = spec.band_region[k - 1];
    const int r_hi = spec.band_region[k];
    if (r_lo == r_hi) throw MeshError("adjacent bands must hold different fluids");
    const int chain = k - 1;
    const int begin = static_cast<int>(topo->interface_edges.size());
    const int line = off[k];
    const int n_edges = spec.cross_cells;
    // Walk so that fluid 1 stays on the right.
    const bool forward = vertical ? (r_lo == 1) : (r_lo == 2);
    for (int e = 0; e < n_edges; ++e) {
      const int m = forward ? e : n_edges - 1 - e;
      InterfaceEdge edge;
      edge.chain = chain;
      const int lo_cell = vertical ? cell_id(m, line / 2 - 1) : cell_id(line / 2 - 1, m);
      const int hi_cell = vertical ? cell_id(m, line / 2) : cell_id(line / 2, m);
      edge.fluid1_cell = r_lo == 1 ? lo_cell : hi_cell;
      edge.fluid2_cell = r_lo == 1 ? hi_cell : lo_cell;
      std::array<int, 3> n{};
      for (int s = 0; s < 3; ++s) {
        n[s] = vertical ? line * NI + 2 * m + s : (2 * m + s) * NI + line;
      }
      if (!forward) std::swap(n[0], n[2]);
      edge.nodes = n;
      topo->interface_edges.push_back(edge);
    }
    topo->chain_ranges.emplace_back(begin, static_cast<int>(topo->interface_edges.size()));
    const bool closed = spec.periodic && vertical;
    topo->chain_closed.push_back(closed);
    if (!closed) {
      const auto& first = topo->interface_edges[begin];
      const auto& last = topo->interface_edges.back();
      WallTag start_wall;
      WallTag end_wall;
      if (vertical) {
        start_wall = forward ? WallTag::Left : WallTag::Right;
        end_wall = forward ? WallTag::Right : WallTag::Left;
      } else {
        start_wall = forward ? WallTag::Bottom : WallTag::Top;
        end_wall = forward ? WallTag::Top : WallTag::Bottom;
      }
      topo->contacts.push_back({first.nodes[0], start_wall, chain, false});
      topo->contacts.push_back({last.nodes[2], end_wall, chain, true});
    }
  }

  for (int cx = 0; cx < NX; ++cx) {
    topo->wall_edges.push_back({{2 * cx, 2 * cx + 1, 2 * cx + 2}, cell_id(cx, 0), WallTag::Bottom});
    const int top = (NJ - 1) * NI;
    topo->wall_edges.push_back(
        {{top + 2 * cx, top + 2 * cx + 1, top + 2 * cx + 2}, cell_id(cx, NY - 1), WallTag::Top});
  }
  if (!spec.periodic) {
    for (int cy = 0; cy < NY; ++cy) {
      const int j = 2 * cy;
      topo->wall_edges.push_back(
          {{j * NI, (j + 1) * NI, (j + 2) * NI}, cell_id(0, cy), WallTag::Left});
      topo->wall_edges.push_back({{j * NI + NI - 1, (j + 1) * NI + NI - 1, (j + 2) * NI + NI - 1},
                                  cell_id(NX - 1, cy), WallTag::Right});
    }
  }

  topo->periodic_image.resize(NI * NJ);
  std::iota(topo->periodic_image.begin(), topo->periodic_image.end(), 0);
  if (spec.periodic) {
    for (int j = 0; j < NJ; ++j) {
      topo->periodic_pairs.push_back({j * NI, j * NI + NI - 1});
      topo->periodic_image[j * NI + NI - 1] = j * NI;
    }
    topo->period = {d.width(), 0.0};
  }

  Mesh mesh(std::move(topo), std::move(nodes));
  const auto [cell, det] = min_jacobian(mesh);
  if (!(det > 0.0)) throw MeshTangledError(cell, det);
  return mesh;
}

Mesh build_structured_mesh(const Rect& domain, int nx, int ny, const InterfaceCurve& curve,
                           MotionDirection direction) {
  StructuredMeshSpec spec;
  spec.domain = domain;
  spec.direction = direction;
  const bool vertical = direction == MotionDirection::Vertical;
  const int along = vertical ? ny : nx;
  spec.cross_cells = vertical ? nx : ny;
  if (along < 2) throw MeshError("need at least two cells along the motion direction");
  // Split the cells along the motion direction by the mean interface position.
  const double lo = vertical ? domain.y0 : domain.x0;
  const double hi = vertical ? domain.y1 : domain.x1;
  const double c0 = vertical ? domain.x0 : domain.y0;
  const double c1 = vertical ? domain.x1 : domain.y1;
  double mean = 0.0;
  const int samples = 64;
  for (int i = 0; i <= samples; ++i) mean += curve(c0 + (c1 - c0) * i / samples);
  mean /= samples + 1;
  int first = static_cast<int>(std::lround(along * (mean - lo) / (hi - lo)));
  first = std::clamp(first, 1, along - 1);
  spec.band_cells = {first, along - first};
  spec.interfaces = {curve};
  spec.band_region = {1, 2};
  return build_structured_mesh(spec);
}

MotionMap MotionMap::single_component(const std::vector<double>& w_per_node,
                                      MotionDirection direction, double dt) {
  MotionMap m;
  m.dt = dt;
  m.displacement.resize(w_per_node.size());
  const Vec2 e = unit_vector(direction);
  for (std::size_t i = 0; i < w_per_node.size(); ++i) m.displacement[i] = (dt * w_per_node[i]) * e;
  return m;
}

void MotionMap::check_single_component(MotionDirection direction) const {
  const int other = 1 - component(direction);
  for (const Vec2& v : displacement) {
    if (v[other] != 0.0) {
      throw MeshError("mesh motion has a nonzero " + std::string(other == 0 ? "x1" : "x2") +
                      " component");
    }
  }
}

std::pair<int, double> min_jacobian(const Mesh& mesh) {
  CellValues cv;
  int worst = -1;
  double min_det = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    cv.reinit(mesh, c);
    for (int q = 0; q < cv.n_points(); ++q) {
      if (cv.jacobian_det(q) < min_det) {
        min_det = cv.jacobian_det(q);
        worst = c;
      }
    }
  }
  return {worst, min_det};
}

Mesh apply_motion(const Mesh& mesh, const MotionMap& motion) {
  if (static_cast<int>(motion.displacement.size()) != mesh.num_nodes()) {
    throw MeshError("displacement size does not match node count");
  }
  motion.check_single_component(mesh.topology().direction);
  std::vector<Vec2> nodes = mesh.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] += motion.displacement[i];
  Mesh moved(mesh.shared_topology(), std::move(nodes));
  const auto [cell, det] = min_jacobian(moved);
  if (!(det > 0.0)) throw MeshTangledError(cell, det);
  return moved;
}

double chain_measure(const Mesh& mesh, int chain, int points_per_edge) {
  EdgeValues ev(points_per_edge);
  const auto& topo = mesh.topology();
  const auto [b, e] = topo.chain_ranges.at(chain);
  double len = 0.0;
  for (int k = b; k < e; ++k) {
    ev.reinit(mesh, topo.interface_edges[k].nodes);
    for (int q = 0; q < ev.n_points(); ++q) len += ev.dsigma(q);
  }
  return len;
}

double interface_measure(const Mesh& mesh, int points_per_edge) {
  double len = 0.0;
  for (int c = 0; c < mesh.topology().num_chains(); ++c) len += chain_measure(mesh, c, points_per_edge);
  return len;
}

double region_integral(const Mesh& mesh, int region,
                       const std::function<double(const QuadraturePoint&)>& integrand,
                       int points_1d) {
  CellValues cv(points_1d);
  double sum = 0.0;
  QuadraturePoint qp;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (region != 0 && mesh.region(c) != region) continue;
    cv.reinit(mesh, c);
    qp.cell = c;
    for (int q = 0; q < cv.n_points(); ++q) {
      qp.q = q;
      qp.ref = cv.ref_point(q);
      qp.x = cv.point(q);
      sum += integrand(qp) * cv.jxw(q);
    }
  }
  return sum;
}

double region_area(const Mesh& mesh, int region) {
  return region_integral(mesh, region, [](const QuadraturePoint&) { return 1.0; });
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  const auto& topo = mesh.topology();
  const auto old_precision = out.precision();
  out << "ale2fluid-mesh v1\n";
  out << mesh.num_nodes() << '\n';
  out << std::setprecision(17);
  for (const Vec2& p : mesh.nodes()) out << p.x << ' ' << p.y << '\n';
  out << mesh.num_cells() << '\n';
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int k = 0; k < 9; ++k) out << topo.cells[c][k] << ' ';
    out << topo.cell_region[c] << '\n';
  }
  out << topo.interface_edges.size() << '\n';
  for (const auto& e : topo.interface_edges) {
    out << e.nodes[0] << ' ' << e.nodes[1] << ' ' << e.nodes[2] << ' ' << e.chain << '\n';
  }
  out << topo.contacts.size() << '\n';
  for (const auto& c : topo.contacts) out << c.node << '\n';
  out.precision(old_precision);
}

namespace {

std::size_t read_count(std::istream& in, const char* what) {
  long long n = -1;
  if (!(in >> n) || n < 0) throw MeshError(std::string("mesh snapshot: bad ") + what + " count");
  return static_cast<std::size_t>(n);
}

}  // namespace

MeshSnapshot read_mesh(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && line.empty()) {
  }
  if (line != "ale2fluid-mesh v1") throw MeshError("mesh snapshot: bad header line");
  MeshSnapshot s;
  s.nodes.resize(read_count(in, "node"));
  for (auto& p : s.nodes) {
    if (!(in >> p.x >> p.y)) throw MeshError("mesh snapshot: truncated node list");
  }
  const std::size_t nc = read_count(in, "cell");
  s.cells.resize(nc);
  s.regions.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    for (int k = 0; k < 9; ++k) in >> s.cells[c][k];
    if (!(in >> s.regions[c])) throw MeshError("mesh snapshot: truncated cell list");
  }
  s.interface_edges.resize(read_count(in, "interface edge"));
  for (auto& e : s.interface_edges) {
    if (!(in >> e[0] >> e[1] >> e[2] >> e[3])) throw MeshError("mesh snapshot: truncated edges");
  }
  s.contacts.resize(read_count(in, "contact"));
  for (auto& c : s.contacts) {
    if (!(in >> c)) throw MeshError("mesh snapshot: truncated contacts");
  }
  return s;
}

}  // namespace ale2fluid
