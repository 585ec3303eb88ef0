#include "twoscale/mesh.hpp"

#include "twoscale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

namespace twoscale {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey make_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::MacroDirichlet:
      return "MacroDirichlet";
    case BoundaryTag::GammaR:
      return "GammaR";
    case BoundaryTag::GammaN:
      return "GammaN";
  }
  return "?";
}

BoundaryTag boundary_tag_from_string(const std::string& name) {
  if (name == "MacroDirichlet") return BoundaryTag::MacroDirichlet;
  if (name == "GammaR") return BoundaryTag::GammaR;
  if (name == "GammaN") return BoundaryTag::GammaN;
  throw InvalidTag("unknown boundary tag '" + name + "'");
}

Mesh2D::Mesh2D(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
               std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)) {
  validate();
}

bool Mesh2D::is_micro() const {
  return std::any_of(boundary_edges_.begin(), boundary_edges_.end(),
                     [](const BoundaryEdge& e) { return e.tag != BoundaryTag::MacroDirichlet; });
}

bool Mesh2D::has_tag(BoundaryTag tag) const {
  return std::any_of(boundary_edges_.begin(), boundary_edges_.end(),
                     [tag](const BoundaryEdge& e) { return e.tag == tag; });
}

double Mesh2D::triangle_area(int t) const {
  const auto& tri = triangles_[t];
  return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh2D::total_area() const {
  double sum = 0.0;
  for (int t = 0; t < n_triangles(); ++t) sum += triangle_area(t);
  return sum;
}

double Mesh2D::boundary_length(BoundaryTag tag) const {
  double sum = 0.0;
  for (const auto& e : boundary_edges_) {
    if (e.tag == tag) sum += (vertices_[e.vertices[1]] - vertices_[e.vertices[0]]).norm();
  }
  return sum;
}

std::vector<int> Mesh2D::tagged_vertices(BoundaryTag tag) const {
  std::vector<int> out;
  for (const auto& e : boundary_edges_) {
    if (e.tag == tag) out.insert(out.end(), e.vertices.begin(), e.vertices.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void Mesh2D::validate() const {
  const int nv = n_vertices();
  std::map<EdgeKey, int> edge_count;
  for (int t = 0; t < n_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) throw InvalidGeometry("triangle references missing vertex");
    }
    if (!(triangle_area(t) > 0.0)) {
      throw InvalidGeometry("triangle " + std::to_string(t) + " has non-positive signed area");
    }
    for (int i = 0; i < 3; ++i) ++edge_count[make_key(tri[i], tri[(i + 1) % 3])];
  }

  std::map<EdgeKey, int> boundary_seen;
  for (const auto& e : boundary_edges_) {
    const auto key = make_key(e.vertices[0], e.vertices[1]);
    auto it = edge_count.find(key);
    if (it == edge_count.end() || it->second != 1) {
      throw InvalidGeometry("boundary edge is not owned by exactly one triangle");
    }
    if (++boundary_seen[key] > 1) throw InvalidGeometry("duplicate boundary edge");
  }
  for (const auto& [key, count] : edge_count) {
    if (count > 2) throw InvalidGeometry("edge shared by more than two triangles");
    if (count == 1 && !boundary_seen.count(key)) {
      throw InvalidGeometry("boundary edge missing from boundary list");
    }
  }

  if (is_micro()) {
    if (has_tag(BoundaryTag::MacroDirichlet)) {
      throw InvalidTagging("micro mesh mixes MacroDirichlet with GammaR/GammaN tags");
    }
    if (!has_tag(BoundaryTag::GammaR)) {
      throw InvalidTagging("micro mesh needs at least one GammaR edge (|Gamma_R| = 0)");
    }
  }
}

Mesh2D make_rect_mesh(const Vec2& lower_left, const Vec2& upper_right, int nx, int ny) {
  if (nx < 1 || ny < 1) throw InvalidGeometry("nx and ny must be at least 1");
  if (!(upper_right.x() > lower_left.x()) || !(upper_right.y() > lower_left.y())) {
    throw InvalidGeometry("degenerate rectangle");
  }
  const Vec2 span = upper_right - lower_left;
  std::vector<Vec2> vertices;
  vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Endpoints are pinned so that the rectangle is reproduced exactly.
      const double x = i == nx ? upper_right.x() : lower_left.x() + span.x() * i / nx;
      const double y = j == ny ? upper_right.y() : lower_left.y() + span.y() * j / ny;
      vertices.emplace_back(x, y);
    }
  }
  auto id = [nx](int i, int j) { return i + j * (nx + 1); };

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }

  std::vector<BoundaryEdge> edges;
  const auto tag = BoundaryTag::MacroDirichlet;
  for (int i = 0; i < nx; ++i) edges.push_back({{id(i, 0), id(i + 1, 0)}, tag});
  for (int j = 0; j < ny; ++j) edges.push_back({{id(nx, j), id(nx, j + 1)}, tag});
  for (int i = nx; i > 0; --i) edges.push_back({{id(i, ny), id(i - 1, ny)}, tag});
  for (int j = ny; j > 0; --j) edges.push_back({{id(0, j), id(0, j - 1)}, tag});

  return Mesh2D(std::move(vertices), std::move(triangles), std::move(edges));
}

Mesh2D tag_boundary(const Mesh2D& mesh, const EdgeClassifier& classifier) {
  auto edges = mesh.boundary_edges();
  for (auto& e : edges) {
    const Vec2 mid = 0.5 * (mesh.vertices()[e.vertices[0]] + mesh.vertices()[e.vertices[1]]);
    e.tag = classifier(mid);
  }
  return Mesh2D(mesh.vertices(), mesh.triangles(), std::move(edges));
}

Mesh2D refine_uniform(const Mesh2D& mesh) {
  auto vertices = mesh.vertices();
  std::map<EdgeKey, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = make_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int index = static_cast<int>(vertices.size());
    vertices.push_back(0.5 * (vertices[a] + vertices[b]));
    midpoint.emplace(key, index);
    return index;
  };

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(4 * mesh.triangles().size());
  for (const auto& tri : mesh.triangles()) {
    const int a = tri[0], b = tri[1], c = tri[2];
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    triangles.push_back({a, ab, ca});
    triangles.push_back({ab, b, bc});
    triangles.push_back({ca, bc, c});
    triangles.push_back({ab, bc, ca});
  }

  std::vector<BoundaryEdge> edges;
  edges.reserve(2 * mesh.boundary_edges().size());
  for (const auto& e : mesh.boundary_edges()) {
    const int m = mid(e.vertices[0], e.vertices[1]);
    edges.push_back({{e.vertices[0], m}, e.tag});
    edges.push_back({{m, e.vertices[1]}, e.tag});
  }
  return Mesh2D(std::move(vertices), std::move(triangles), std::move(edges));
}

double mesh_size(const Mesh2D& mesh) {
  double h = 0.0;
  const auto& v = mesh.vertices();
  for (const auto& tri : mesh.triangles()) {
    for (int i = 0; i < 3; ++i) h = std::max(h, (v[tri[(i + 1) % 3]] - v[tri[i]]).norm());
  }
  return h;
}

double quasi_uniformity(const Mesh2D& mesh) {
  double min_inscribed = std::numeric_limits<double>::infinity();
  const auto& v = mesh.vertices();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    double perimeter = 0.0;
    for (int i = 0; i < 3; ++i) perimeter += (v[tri[(i + 1) % 3]] - v[tri[i]]).norm();
    // inradius = area / semi-perimeter
    min_inscribed = std::min(min_inscribed, 4.0 * mesh.triangle_area(t) / perimeter);
  }
  return mesh_size(mesh) / min_inscribed;
}

Mesh2D renumber_vertices(const Mesh2D& mesh, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != mesh.n_vertices()) {
    throw DimensionMismatch("permutation size differs from vertex count");
  }
  std::vector<Vec2> vertices(mesh.vertices().size());
  for (int i = 0; i < mesh.n_vertices(); ++i) vertices[perm[i]] = mesh.vertices()[i];
  auto triangles = mesh.triangles();
  for (auto& tri : triangles) {
    for (int& k : tri) k = perm[k];
  }
  auto edges = mesh.boundary_edges();
  for (auto& e : edges) {
    for (int& k : e.vertices) k = perm[k];
  }
  return Mesh2D(std::move(vertices), std::move(triangles), std::move(edges));
}

EdgeClassifier gamma_r_preset(const std::string& name, const Vec2& lower_left,
                              const Vec2& upper_right) {
  const double tol = 1e-12 * std::max(1.0, (upper_right - lower_left).norm());
  if (name == "top_edge") {
    return [=](const Vec2& m) {
      return std::abs(m.y() - upper_right.y()) < tol ? BoundaryTag::GammaR : BoundaryTag::GammaN;
    };
  }
  if (name == "left_edge") {
    return [=](const Vec2& m) {
      return std::abs(m.x() - lower_left.x()) < tol ? BoundaryTag::GammaR : BoundaryTag::GammaN;
    };
  }
  if (name == "full_boundary_minus_bottom") {
    return [=](const Vec2& m) {
      return std::abs(m.y() - lower_left.y()) < tol ? BoundaryTag::GammaN : BoundaryTag::GammaR;
    };
  }
  throw InvalidTagging("unknown Gamma_R preset '" + name + "'");
}

void write_mesh(std::ostream& out, const Mesh2D& mesh) {
  const auto precision = out.precision(17);
  for (const auto& p : mesh.vertices()) out << "v " << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles()) out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges()) {
    out << "b " << e.vertices[0] << ' ' << e.vertices[1] << ' ' << to_string(e.tag) << '\n';
  }
  out.precision(precision);
}

Mesh2D read_mesh(std::istream& in) {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    bool ok = false;
    if (kind == "v") {
      double x, y;
      ok = static_cast<bool>(ss >> x >> y);
      if (ok) vertices.emplace_back(x, y);
    } else if (kind == "t") {
      std::array<int, 3> t{};
      ok = static_cast<bool>(ss >> t[0] >> t[1] >> t[2]);
      if (ok) triangles.push_back(t);
    } else if (kind == "b") {
      int a, b;
      std::string tag;
      ok = static_cast<bool>(ss >> a >> b >> tag);
      if (ok) edges.push_back({{a, b}, boundary_tag_from_string(tag)});
    }
    if (!ok) throw InvalidGeometry("malformed mesh line " + std::to_string(line_no));
  }
  return Mesh2D(std::move(vertices), std::move(triangles), std::move(edges));
}

}  // namespace twoscale
