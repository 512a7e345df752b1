#include "confgap/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/SparseCholesky>

#include "confgap/errors.hpp"

namespace confgap {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// deterministic values in [-1, 1)
double hashed_unit(std::uint64_t i, std::uint64_t j) {
    const std::uint64_t h = splitmix64(i * 0x100000001B3ull + splitmix64(j + 1));
    return static_cast<double>(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

Eigen::MatrixXd start_block(Eigen::Index n, Eigen::Index m) {
    Eigen::MatrixXd Y(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        Y(i, 0) = 1.0;
        for (Eigen::Index j = 1; j < m; ++j) {
            Y(i, j) = hashed_unit(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
        }
    }
    Y(0, 0) += 1e-3;
    return Y;
}

void b_orthonormalize(Eigen::MatrixXd& Y, const SparseMatrix& B) {
    const Eigen::Index m = Y.cols();
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < j; ++i) {
                const double c = Y.col(i).dot(B * Y.col(j));
                Y.col(j) -= c * Y.col(i);
            }
            const double nrm2 = Y.col(j).dot(B * Y.col(j));
            if (!(nrm2 > 0.0) || !std::isfinite(nrm2)) {
                throw NumericalError("block vectors became B-linearly dependent during orthonormalization");
            }
            Y.col(j) /= std::sqrt(nrm2);
        }
    }
}

double gershgorin_lower(const SparseMatrix& A) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(A.rows());
    Eigen::VectorXd off = Eigen::VectorXd::Zero(A.rows());
    for (Eigen::Index k = 0; k < A.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
            if (it.row() == it.col()) diag(it.row()) += it.value();
            else off(it.row()) += std::fabs(it.value());
        }
    }
    return (diag - off).minCoeff();
}

double gershgorin_upper_abs(const SparseMatrix& B) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(B.rows());
    for (Eigen::Index k = 0; k < B.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(B, k); it; ++it) rows(it.row()) += std::fabs(it.value());
    }
    return rows.maxCoeff();
}

using Factorization = Eigen::SimplicialLDLT<SparseMatrix>;

bool factor_positive(Factorization& f, const SparseMatrix& M) {
    f.compute(M);
    if (f.info() != Eigen::Success) return false;
    const Eigen::VectorXd d = f.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    return d.minCoeff() > 1e-12 * dmax;
}

double mean_diagonal_ratio(const SparseMatrix& A, const SparseMatrix& B) {
    const double ta = A.diagonal().sum();
    const double tb = B.diagonal().sum();
    return tb > 0.0 ? ta / tb : 1.0;
}

// picks a shift that makes A - sigma B positive definite and factors it
double factor_shifted(Factorization& f, const SparseMatrix& A, const SparseMatrix& B, std::optional<double> requested) {
    if (requested) {
        const SparseMatrix M = A - *requested * B;
        f.compute(M);
        if (f.info() != Eigen::Success) throw NumericalError("sparse factorization of A - sigma B failed");
        return *requested;
    }
    const double gA = gershgorin_lower(A);
    if (gA >= 0.0 && factor_positive(f, A)) return 0.0;
    double sigma = 0.0;
    if (gA < 0.0) sigma = 1.1 * gA / gershgorin_upper_abs(B);
    if (sigma == 0.0) sigma = -1e-3 * mean_diagonal_ratio(A, B);
    for (int attempt = 0; attempt < 8; ++attempt, sigma *= 4.0) {
        const SparseMatrix M = A - sigma * B;
        if (factor_positive(f, M)) return sigma;
    }
    throw NumericalError("no shift made A - sigma B positive definite");
}

void orient_vector(Eigen::VectorXd& u, bool principal) {
    if (principal) {
        if (u.maxCoeff() < -u.minCoeff()) u = -u;
        return;
    }
    Eigen::Index idx = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (std::fabs(u(i)) > best * (1.0 + 1e-12)) {
            best = std::fabs(u(i));
            idx = i;
        }
    }
    if (u(idx) < 0.0) u = -u;
}

}  // namespace

EigenResult solve_lowest(const AssembledSystem& system, int k, const SolverOptions& options) {
    if (k < 1 || k > 3) throw DomainError("solve_lowest supports 1 to 3 eigenpairs");
    const SparseMatrix& A = system.A;
    const SparseMatrix& B = system.B;
    const Eigen::Index n = A.rows();
    if (n < k) throw NumericalError("system has fewer unknowns than requested eigenpairs");
    const Eigen::Index m = std::min<Eigen::Index>(k + 3, n);

    Factorization factor;
    const double sigma = factor_shifted(factor, A, B, options.shift);

    Eigen::MatrixXd Y = start_block(n, m);
    b_orthonormalize(Y, B);
    Eigen::VectorXd theta_prev = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::quiet_NaN());
    Eigen::VectorXd theta(m);
    std::vector<double> history;
    std::vector<double> residuals(static_cast<std::size_t>(k));
    int iteration = 0;
    bool converged = false;

    for (iteration = 1; iteration <= options.max_iterations; ++iteration) {
        Eigen::MatrixXd Z = factor.solve(B * Y);
        if (factor.info() != Eigen::Success || !Z.allFinite()) throw NumericalError("shifted solve failed", history);
        b_orthonormalize(Z, B);
        const Eigen::MatrixXd AZ = A * Z;
        const Eigen::MatrixXd BZ = B * Z;
        Eigen::MatrixXd Ar = Z.transpose() * AZ;
        Eigen::MatrixXd Br = Z.transpose() * BZ;
        Ar = 0.5 * (Ar + Ar.transpose()).eval();
        Br = 0.5 * (Br + Br.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(Ar, Br);
        if (rr.info() != Eigen::Success) throw NumericalError("Rayleigh-Ritz projection failed", history);
        theta = rr.eigenvalues();
        const Eigen::MatrixXd C = rr.eigenvectors();
        Y = Z * C;
        const Eigen::MatrixXd AY = AZ * C;
        const Eigen::MatrixXd BY = BZ * C;

        const double scale = std::max(std::fabs(theta(k - 1)), std::numeric_limits<double>::min());
        bool done = true;
        double worst = 0.0;
        for (int i = 0; i < k; ++i) {
            const double r = (AY.col(i) - theta(i) * BY.col(i)).norm() / BY.col(i).norm();
            residuals[static_cast<std::size_t>(i)] = r;
            worst = std::max(worst, r);
            const double change = std::fabs(theta(i) - theta_prev(i));
            if (!(change <= options.eigenvalue_tolerance * scale) || !(r <= options.residual_tolerance)) done = false;
        }
        history.push_back(worst);
        theta_prev = theta;
        if (done) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NumericalError("eigensolver did not converge in " + std::to_string(options.max_iterations) + " iterations",
                             history);
    }

    EigenResult out;
    out.shift = sigma;
    out.iterations = iteration;
    out.mesh_h = system.mesh ? system.mesh->h_max : 0.0;
    out.num_vertices = system.index_map.size();
    out.num_unknowns = static_cast<std::size_t>(n);
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd u = Y.col(i);
        orient_vector(u, i == 0);
        out.vectors.push_back(system.expand(u));
        out.eigenvalues.push_back(theta(i));
    }
    out.residuals = residuals;
    out.lambda1 = out.eigenvalues[0];
    out.residual1 = residuals[0];
    if (k >= 2) {
        out.lambda2 = out.eigenvalues[1];
        out.residual2 = residuals[1];
        out.gap = out.lambda2 - out.lambda1;
    }
    return out;
}

GapResult fundamental_gap(const WeightedProblem& problem, double h, const MeshOptions& mesh_options,
                          const SolverOptions& options) {
    GapResult out;
    out.h = h;
    out.coarse_mesh = triangulate(problem.domain, h, mesh_options);
    out.coarse = solve_lowest(assemble(problem, out.coarse_mesh), 2, options);
    out.fine_mesh = triangulate(problem.domain, 0.5 * h, mesh_options);
    out.fine = solve_lowest(assemble(problem, out.fine_mesh), 2, options);
    out.gap = out.fine.gap;
    out.extrapolated_gap = (4.0 * out.fine.gap - out.coarse.gap) / 3.0;
    return out;
}

namespace {

// per-triangle stiffness coefficient: midpoint-rule mean of u1^2, exact for the quadratic u1_h^2
double mean_square_at_midpoints(const TriMesh& mesh, std::size_t t, const Eigen::VectorXd& u) {
    const auto& tri = mesh.triangles[t];
    const double a = u(tri[0]), b = u(tri[1]), c = u(tri[2]);
    const double m0 = 0.5 * (b + c), m1 = 0.5 * (c + a), m2 = 0.5 * (a + b);
    return (m0 * m0 + m1 * m1 + m2 * m2) / 3.0;
}

std::array<double, 3> midpoint_values(const TriMesh& mesh, std::size_t t, const Eigen::VectorXd& u) {
    const auto& tri = mesh.triangles[t];
    const double a = u(tri[0]), b = u(tri[1]), c = u(tri[2]);
    return {0.5 * (b + c), 0.5 * (c + a), 0.5 * (a + b)};
}

}  // namespace

RatioResidual ratio_residual(const EigenResult& result, const AssembledSystem& system, const SparseMatrix& rho_mass) {
    if (!system.mesh) throw DomainError("assembled system carries no mesh");
    if (result.vectors.size() < 2) throw DomainError("ratio residual needs two eigenvectors");
    const TriMesh& mesh = *system.mesh;
    const Eigen::VectorXd& u1 = result.u1();
    const Eigen::VectorXd& u2 = result.u2();
    const std::size_t nv = mesh.vertices.size();
    const double cutoff = 1e-8 * u1.maxCoeff();

    RatioResidual out;
    std::vector<char> retained(nv, 0);
    std::size_t interior = 0;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
    for (std::size_t v = 0; v < nv; ++v) {
        if (mesh.boundary[v]) continue;
        ++interior;
        if (u1(static_cast<Eigen::Index>(v)) < cutoff) {
            ++out.excluded;
            continue;
        }
        retained[v] = 1;
        ++out.retained;
        w(static_cast<Eigen::Index>(v)) = u2(static_cast<Eigen::Index>(v)) / u1(static_cast<Eigen::Index>(v));
    }
    out.exclusion_warning = interior > 0 && out.excluded * 5 > interior;

    // extend w outward from retained vertices by neighbour averaging
    const auto neighbors = mesh.vertex_neighbors();
    std::vector<char> known = retained;
    for (int sweep = 0; sweep < 64; ++sweep) {
        bool changed = false;
        std::vector<std::pair<std::size_t, double>> updates;
        for (std::size_t v = 0; v < nv; ++v) {
            if (known[v]) continue;
            double s = 0.0;
            int c = 0;
            for (int nb : neighbors[v]) {
                if (known[static_cast<std::size_t>(nb)]) {
                    s += w(nb);
                    ++c;
                }
            }
            if (c > 0) updates.push_back({v, s / c});
        }
        for (const auto& [v, val] : updates) {
            w(static_cast<Eigen::Index>(v)) = val;
            known[v] = 1;
            changed = true;
        }
        if (!changed) break;
    }

    const auto weighted = assemble_coefficients(
        mesh, BoundaryCondition::Neumann,
        [&](std::size_t t) {
            ElementCoefficients c;
            c.stiffness = mean_square_at_midpoints(mesh, t, u1);
            return c;
        },
        true);
    const Eigen::VectorXd lhs = weighted.A_full * w;
    const Eigen::VectorXd rhs = result.gap * (rho_mass * u1.cwiseProduct(u2));
    double num = 0.0, den = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
        if (!retained[v]) continue;
        const double r = lhs(static_cast<Eigen::Index>(v)) - rhs(static_cast<Eigen::Index>(v));
        num += r * r;
        den += rhs(static_cast<Eigen::Index>(v)) * rhs(static_cast<Eigen::Index>(v));
    }
    out.residual = den > 0.0 ? std::sqrt(num / den) : std::numeric_limits<double>::infinity();
    return out;
}

RatioResidual ratio_residual(const EigenResult& result, const AssembledSystem& system) {
    return ratio_residual(result, system, system.B_full);
}

NeumannResult drift_neumann_mu2(const EigenResult& result, const WeightedProblem& problem, const TriMesh& mesh) {
    if (result.vectors.empty()) throw DomainError("drift Neumann problem needs the principal eigenvector");
    const Eigen::VectorXd& u1 = result.u1();
    if (u1.size() != static_cast<Eigen::Index>(mesh.vertices.size())) {
        throw DomainError("eigenvector does not match the mesh");
    }
    const auto sys_all = assemble_coefficients(
        mesh, BoundaryCondition::Neumann,
        [&](std::size_t t) {
            ElementCoefficients c;
            c.stiffness = mean_square_at_midpoints(mesh, t, u1);
            const auto mids = edge_midpoints(mesh, t);
            const auto um = midpoint_values(mesh, t, u1);
            for (std::size_t k = 0; k < 3; ++k) c.weight[k] = problem.rho(mids[k]) * um[k] * um[k];
            return c;
        },
        true);

    // keep vertices that carry weighted mass
    AssembledSystem sys;
    sys.bc = BoundaryCondition::Neumann;
    sys.mesh = sys_all.mesh;
    sys.A_full = sys_all.A_full;
    sys.B_full = sys_all.B_full;
    sys.index_map.assign(mesh.vertices.size(), -1);
    const Eigen::VectorXd bdiag = sys_all.B_full.diagonal();
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (bdiag(static_cast<Eigen::Index>(v)) > 0.0) {
            sys.index_map[v] = static_cast<int>(sys.dofs.size());
            sys.dofs.push_back(static_cast<int>(v));
        }
    }
    std::vector<Eigen::Triplet<double>> ta, tb;
    for (Eigen::Index c = 0; c < sys_all.A_full.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(sys_all.A_full, c); it; ++it) {
            const int r = sys.index_map[static_cast<std::size_t>(it.row())];
            const int q = sys.index_map[static_cast<std::size_t>(it.col())];
            if (r >= 0 && q >= 0) ta.emplace_back(r, q, it.value());
        }
        for (SparseMatrix::InnerIterator it(sys_all.B_full, c); it; ++it) {
            const int r = sys.index_map[static_cast<std::size_t>(it.row())];
            const int q = sys.index_map[static_cast<std::size_t>(it.col())];
            if (r >= 0 && q >= 0) tb.emplace_back(r, q, it.value());
        }
    }
    const auto nr = static_cast<Eigen::Index>(sys.dofs.size());
    sys.A.resize(nr, nr);
    sys.B.resize(nr, nr);
    sys.A.setFromTriplets(ta.begin(), ta.end());
    sys.B.setFromTriplets(tb.begin(), tb.end());

    NeumannResult out;
    out.dropped_vertices = mesh.vertices.size() - sys.dofs.size();
    out.spectrum = solve_lowest(sys, 2);
    out.mu1 = out.spectrum.lambda1;
    out.mu2 = out.spectrum.lambda2;
    return out;
}

double rayleigh_lower_bound(double lambda1_unweighted, double min_potential, double rho_sup) {
    if (!(rho_sup > 0.0)) throw InvalidWeight("weight supremum must be positive");
    return (lambda1_unweighted + min_potential) / rho_sup;
}

double andrews_ni_bound(double a, double diameter) {
    if (!(diameter > 0.0)) throw DomainError("diameter must be positive");
    return 0.5 * a + std::numbers::pi * std::numbers::pi / (diameter * diameter);
}

double weight_sup(const ScalarField& rho, const TriMesh& mesh) {
    double s = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (const Point& m : edge_midpoints(mesh, t)) s = std::max(s, rho(m));
    }
    return s;
}

double potential_inf(const ScalarField& V, const TriMesh& mesh) {
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (const Point& m : edge_midpoints(mesh, t)) s = std::min(s, V(m));
    }
    return s;
}

void write_eigen_csv(const EigenResult& result, const TriMesh& mesh, std::ostream& out) {
    out.precision(17);
    out << "index,x,y,u1,u2\n";
    const bool two = result.vectors.size() >= 2;
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        out << i << ',' << mesh.vertices[i].x << ',' << mesh.vertices[i].y << ',' << result.u1()(ii) << ','
            << (two ? result.u2()(ii) : 0.0) << '\n';
    }
}

}  // namespace confgap
