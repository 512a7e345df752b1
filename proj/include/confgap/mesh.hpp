#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "confgap/domain.hpp"

namespace confgap {

struct TriMesh {
    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> triangles;  // counterclockwise
    std::vector<bool> boundary;                 // true on the domain polyline
    double h_max = 0.0;                         // longest edge

    std::size_t num_vertices() const noexcept { return vertices.size(); }
    std::size_t num_triangles() const noexcept { return triangles.size(); }
    std::size_t num_interior() const;

    double area() const;
    double min_angle_degrees() const;
    double triangle_area(std::size_t t) const;

    /// Every vertex index touched by a triangle sharing a vertex with i, i excluded.
    std::vector<std::vector<int>> vertex_neighbors() const;

    /// Throws MalformedDomain if a structural invariant is broken: orientation,
    /// degenerate area, non-manifold or non-conforming edges.
    void validate() const;
};

struct MeshOptions {
    double min_angle_degrees = 25.0;
    /// Triangles with an edge longer than this multiple of h are split.
    double max_edge_factor = 1.3;
    /// Interior lattice points closer than this multiple of h to the boundary are dropped.
    double boundary_clearance = 0.55;
    std::size_t max_vertices = 4'000'000;
};

/// Quality triangulation of the chart-coordinate polygon. Interior points
/// start on a triangular lattice of spacing h_target; boundary edges are
/// split to length at most h_target; incremental Delaunay insertion is
/// followed by Ruppert refinement (encroached boundary pieces are bisected,
/// bad triangles receive their circumcenter).
TriMesh triangulate(const Domain2D& domain, double h_target, const MeshOptions& options = {});

/// vertices file rows: index,x,y,boundary; triangles file rows: index,v0,v1,v2.
void write_mesh_csv(const TriMesh& mesh, std::ostream& vertices_out, std::ostream& triangles_out);

}  // namespace confgap
