#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "confgap/assembly.hpp"

namespace confgap {

struct SolverOptions {
    /// Relative change of each wanted Ritz value between sweeps.
    double eigenvalue_tolerance = 1e-10;
    /// |A u - lambda B u| / |B u| required of each wanted pair.
    double residual_tolerance = 1e-9;
    int max_iterations = 500;
    /// Spectral shift; chosen automatically when unset.
    std::optional<double> shift;
};

struct EigenResult {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double gap = 0.0;
    double residual1 = 0.0;  // |A u - lambda B u| / |B u|
    double residual2 = 0.0;
    double mesh_h = 0.0;
    double shift = 0.0;
    int iterations = 0;
    std::vector<double> eigenvalues;
    std::vector<double> residuals;
    /// Per-vertex eigenvectors, zero on eliminated boundary vertices.
    std::vector<Eigen::VectorXd> vectors;
    std::size_t num_vertices = 0;
    std::size_t num_unknowns = 0;

    const Eigen::VectorXd& u1() const { return vectors.at(0); }
    const Eigen::VectorXd& u2() const { return vectors.at(1); }
};

/// k lowest eigenpairs of A u = lambda B u, 1 <= k <= 3, by block inverse
/// iteration on a sparse LDL^T factorization of A - shift B with
/// B-orthonormalization and Rayleigh-Ritz projection. Start vectors are
/// deterministic. Eigenvectors are B-orthonormal; u1 is scaled to a positive
/// maximum and u2 so that its largest-magnitude entry is positive.
EigenResult solve_lowest(const AssembledSystem& system, int k = 2, const SolverOptions& options = {});

struct GapResult {
    double gap = 0.0;               // on the finer mesh
    double extrapolated_gap = 0.0;  // (4 gap(h/2) - gap(h)) / 3
    double h = 0.0;
    EigenResult coarse;
    EigenResult fine;
    TriMesh coarse_mesh;
    TriMesh fine_mesh;
};

/// Triangulate, assemble and solve at h and h/2.
GapResult fundamental_gap(const WeightedProblem& problem, double h, const MeshOptions& mesh_options = {},
                          const SolverOptions& options = {});

struct RatioResidual {
    double residual = 0.0;
    std::size_t retained = 0;
    std::size_t excluded = 0;
    bool exclusion_warning = false;  // more than 20% of interior vertices excluded
};

/// Weak residual of the ratio equation for w = u2 / u1:
/// int u1^2 grad w . grad xi = gap int rho w xi u1^2 for hat functions xi at
/// retained vertices. Boundary values of w are extended from interior
/// neighbours. Returned as |r| / |gap M w| over the retained rows.
RatioResidual ratio_residual(const EigenResult& result, const AssembledSystem& system, const SparseMatrix& rho_mass);
RatioResidual ratio_residual(const EigenResult& result, const AssembledSystem& system);

struct NeumannResult {
    double mu1 = 0.0;
    double mu2 = 0.0;
    std::size_t dropped_vertices = 0;
    EigenResult spectrum;
};

/// Second eigenvalue of int u1^2 grad u . grad xi = mu int rho u xi u1^2 over
/// all vertices with natural boundary conditions. Vertices on which the
/// weighted mass vanishes are dropped.
NeumannResult drift_neumann_mu2(const EigenResult& result, const WeightedProblem& problem, const TriMesh& mesh);

/// (lambda1 of the unweighted problem + min V) / sup rho.
double rayleigh_lower_bound(double lambda1_unweighted, double min_potential, double rho_sup);

/// a/2 + pi^2/D^2, the lower bound for sup(rho) * mu2.
double andrews_ni_bound(double a, double diameter);

/// Largest value of the weight over all quadrature points of the mesh.
double weight_sup(const ScalarField& rho, const TriMesh& mesh);
double potential_inf(const ScalarField& V, const TriMesh& mesh);

/// Rows: index,x,y,u1,u2.
void write_eigen_csv(const EigenResult& result, const TriMesh& mesh, std::ostream& out);

}  // namespace confgap
