#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "confgap/chart.hpp"
#include "confgap/domain.hpp"
#include "confgap/field.hpp"
#include "confgap/mesh.hpp"

namespace confgap {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class BoundaryCondition { Dirichlet, Neumann };

/// -Delta u + V u = lambda rho u on the domain, posed in flat chart
/// coordinates. V and rho already contain every conformal factor.
struct WeightedProblem {
    ConformalChart chart;
    Domain2D domain;
    ScalarField V;
    ScalarField rho;
    BoundaryCondition bc = BoundaryCondition::Dirichlet;
};

/// The weighting that turns the Laplace-Beltrami Dirichlet problem of the
/// domain's chart into a flat one: V = 0, rho = rho_tilde e^{2 phi}.
WeightedProblem laplace_beltrami_problem(const Domain2D& domain, const ScalarField& rho_tilde = ScalarField::constant(1.0));

struct AssembledSystem {
    SparseMatrix A;       // stiffness plus potential mass on the unknowns
    SparseMatrix B;       // rho-weighted mass on the unknowns
    SparseMatrix A_full;  // same over every vertex, before elimination
    SparseMatrix B_full;
    /// vertex -> row of A, or -1 for an eliminated boundary vertex
    std::vector<int> index_map;
    /// row of A -> vertex
    std::vector<int> dofs;
    std::shared_ptr<const TriMesh> mesh;
    BoundaryCondition bc = BoundaryCondition::Dirichlet;

    Eigen::Index size() const noexcept { return A.rows(); }
    /// Scatter a vector on the unknowns to all vertices, zero elsewhere.
    Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
    Eigen::VectorXd restrict_to_dofs(const Eigen::VectorXd& full) const;
};

/// Quadrature data of one triangle: the stiffness coefficient (constant on
/// the element) and potential / weight values at the three edge midpoints,
/// midpoint k lying opposite vertex k.
struct ElementCoefficients {
    double stiffness = 1.0;
    std::array<double, 3> potential{};
    std::array<double, 3> weight{};
};

using CoefficientFn = std::function<ElementCoefficients(std::size_t triangle)>;

std::array<Point, 3> edge_midpoints(const TriMesh& mesh, std::size_t triangle);

/// P1 matrices with three-point edge-midpoint quadrature. Element matrices
/// are computed in parallel; the sparse fill runs in triangle order so the
/// result is bit-identical to assemble_serial.
AssembledSystem assemble(const WeightedProblem& problem, const TriMesh& mesh);
AssembledSystem assemble_serial(const WeightedProblem& problem, const TriMesh& mesh);

/// Lower-level entry used for weighted auxiliary forms; parallel selects the OpenMP element loop.
AssembledSystem assemble_coefficients(const TriMesh& mesh, BoundaryCondition bc, const CoefficientFn& coeffs,
                                      bool parallel = true);

/// One "row col value" line per stored entry, zero-based indices.
void write_coo(const SparseMatrix& m, std::ostream& out);

}  // namespace confgap
