#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace twoscale {

using Vec2 = Eigen::Vector2d;

enum class BoundaryTag { MacroDirichlet, GammaR, GammaN };

std::string to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& name);

struct BoundaryEdge {
  std::array<int, 2> vertices;
  BoundaryTag tag;
};

/// Conforming triangulation of a rectangle with tagged boundary edges.
///
/// Triangles are counter-clockwise. Boundary edges are stored in the
/// orientation of their owning triangle, so the outward normal of edge (a, b)
/// is the right-hand normal of b - a. A mesh whose tags are all
/// MacroDirichlet is a macro mesh; otherwise every tag must be GammaR or
/// GammaN and at least one must be GammaR (micro mesh).
class Mesh2D {
 public:
  Mesh2D() = default;
  Mesh2D(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
         std::vector<BoundaryEdge> boundary_edges);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }

  bool is_micro() const;
  bool has_tag(BoundaryTag tag) const;
  double triangle_area(int t) const;
  double total_area() const;
  double boundary_length(BoundaryTag tag) const;
  /// Vertices incident to at least one edge with the given tag, ascending.
  std::vector<int> tagged_vertices(BoundaryTag tag) const;

  /// Throws InvalidGeometry / InvalidTagging when an invariant fails.
  void validate() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
};

using EdgeClassifier = std::function<BoundaryTag(const Vec2& midpoint)>;

/// Structured nx-by-ny grid, each cell split along its (i,j)-(i+1,j+1)
/// diagonal. All boundary edges are tagged MacroDirichlet.
Mesh2D make_rect_mesh(const Vec2& lower_left, const Vec2& upper_right, int nx, int ny);

Mesh2D tag_boundary(const Mesh2D& mesh, const EdgeClassifier& classifier);

/// Red refinement: every triangle splits into four through its edge midpoints.
Mesh2D refine_uniform(const Mesh2D& mesh);

/// Longest triangle side.
double mesh_size(const Mesh2D& mesh);

/// Longest side over smallest inscribed-circle diameter.
double quasi_uniformity(const Mesh2D& mesh);

/// Same mesh with vertex indices permuted: new index of old vertex i is perm[i].
Mesh2D renumber_vertices(const Mesh2D& mesh, const std::vector<int>& perm);

/// Named micro-cell classifiers for an axis-aligned cell [lower_left, upper_right].
EdgeClassifier gamma_r_preset(const std::string& name, const Vec2& lower_left,
                              const Vec2& upper_right);

/// "v x y" / "t i j k" / "b i j TAG" text dump.
void write_mesh(std::ostream& out, const Mesh2D& mesh);
Mesh2D read_mesh(std::istream& in);

}  // namespace twoscale
