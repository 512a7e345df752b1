#include "confgap/assembly.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "confgap/errors.hpp"

namespace confgap {

namespace {

struct ElementMatrices {
    std::array<double, 9> a{};
    std::array<double, 9> b{};
};

// barycentric values at the edge midpoints: phi_i(m_k) = 1/2 for i != k, 0 for i == k
constexpr double phi_at_midpoint(int i, int k) { return i == k ? 0.0 : 0.5; }

ElementMatrices element_matrices(const TriMesh& mesh, std::size_t t, const ElementCoefficients& c) {
    const auto& tri = mesh.triangles[t];
    const Point p0 = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Point p1 = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Point p2 = mesh.vertices[static_cast<std::size_t>(tri[2])];
    const double area2 = cross(p1 - p0, p2 - p0);
    const double area = 0.5 * area2;
    // gradient of the hat function of vertex i is perp(edge opposite i) / (2 area), up to sign
    const std::array<Vec2, 3> grad{Vec2{p1.y - p2.y, p2.x - p1.x} / area2, Vec2{p2.y - p0.y, p0.x - p2.x} / area2,
                                   Vec2{p0.y - p1.y, p1.x - p0.x} / area2};
    ElementMatrices m;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            double pot = 0.0, wt = 0.0;
            for (int k = 0; k < 3; ++k) {
                const double pp = phi_at_midpoint(i, k) * phi_at_midpoint(j, k);
                pot += c.potential[static_cast<std::size_t>(k)] * pp;
                wt += c.weight[static_cast<std::size_t>(k)] * pp;
            }
            const double aij = c.stiffness * area * dot(grad[static_cast<std::size_t>(i)], grad[static_cast<std::size_t>(j)]) +
                               area / 3.0 * pot;
            const double bij = area / 3.0 * wt;
            m.a[static_cast<std::size_t>(3 * i + j)] = m.a[static_cast<std::size_t>(3 * j + i)] = aij;
            m.b[static_cast<std::size_t>(3 * i + j)] = m.b[static_cast<std::size_t>(3 * j + i)] = bij;
        }
    }
    return m;
}

CoefficientFn problem_coefficients(const WeightedProblem& problem, const TriMesh& mesh) {
    return [&problem, &mesh](std::size_t t) {
        ElementCoefficients c;
        const auto mids = edge_midpoints(mesh, t);
        for (std::size_t k = 0; k < 3; ++k) {
            c.potential[k] = problem.V(mids[k]);
            c.weight[k] = problem.rho(mids[k]);
        }
        return c;
    };
}

}  // namespace

WeightedProblem laplace_beltrami_problem(const Domain2D& domain, const ScalarField& rho_tilde) {
    const auto form = schrodinger_transform(domain.chart(), rho_tilde, 2);
    return WeightedProblem{domain.chart(), domain, form.potential, form.weight, BoundaryCondition::Dirichlet};
}

Eigen::VectorXd AssembledSystem::expand(const Eigen::VectorXd& reduced) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(index_map.size()));
    for (std::size_t r = 0; r < dofs.size(); ++r) full(dofs[r]) = reduced(static_cast<Eigen::Index>(r));
    return full;
}

Eigen::VectorXd AssembledSystem::restrict_to_dofs(const Eigen::VectorXd& full) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t r = 0; r < dofs.size(); ++r) out(static_cast<Eigen::Index>(r)) = full(dofs[r]);
    return out;
}

std::array<Point, 3> edge_midpoints(const TriMesh& mesh, std::size_t t) {
    const auto& tri = mesh.triangles[t];
    const Point p0 = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Point p1 = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Point p2 = mesh.vertices[static_cast<std::size_t>(tri[2])];
    return {(p1 + p2) * 0.5, (p2 + p0) * 0.5, (p0 + p1) * 0.5};
}

AssembledSystem assemble_coefficients(const TriMesh& mesh, BoundaryCondition bc, const CoefficientFn& coeffs,
                                      bool parallel) {
    const std::size_t nt = mesh.triangles.size();
    const std::size_t nv = mesh.vertices.size();
    std::vector<ElementMatrices> elements(nt);
    std::vector<ElementCoefficients> coefficients(nt);

    auto compute = [&](std::size_t t) {
        coefficients[t] = coeffs(t);
        elements[t] = element_matrices(mesh, t, coefficients[t]);
    };
    if (parallel) {
        // exceptions must not cross the parallel region; the first failing triangle is rethrown
        std::ptrdiff_t first_bad = std::numeric_limits<std::ptrdiff_t>::max();
        std::string message;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(nt); ++t) {
            try {
                compute(static_cast<std::size_t>(t));
            } catch (const std::exception& e) {
#pragma omp critical(confgap_assembly_error)
                if (t < first_bad) {
                    first_bad = t;
                    message = e.what();
                }
            }
        }
        if (first_bad != std::numeric_limits<std::ptrdiff_t>::max()) {
            compute(static_cast<std::size_t>(first_bad));  // rethrows with the original type
            throw NumericalError(message);
        }
    } else {
        for (std::size_t t = 0; t < nt; ++t) compute(t);
    }

    for (std::size_t t = 0; t < nt; ++t) {
        const auto mids = edge_midpoints(mesh, t);
        for (std::size_t k = 0; k < 3; ++k) {
            const double w = coefficients[t].weight[k];
            if (!(w > 0.0) && bc == BoundaryCondition::Dirichlet) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "weight rho = " << w << " is not positive at quadrature point (" << mids[k].x << ", "
                    << mids[k].y << ")";
                throw InvalidWeight(msg.str());
            }
            if (!std::isfinite(w) || !std::isfinite(coefficients[t].potential[k])) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "non-finite coefficient at quadrature point (" << mids[k].x << ", " << mids[k].y << ")";
                throw InvalidWeight(msg.str());
            }
        }
    }

    AssembledSystem sys;
    sys.bc = bc;
    sys.index_map.assign(nv, -1);
    for (std::size_t v = 0; v < nv; ++v) {
        if (bc == BoundaryCondition::Neumann || !mesh.boundary[v]) {
            sys.index_map[v] = static_cast<int>(sys.dofs.size());
            sys.dofs.push_back(static_cast<int>(v));
        }
    }

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> af, bf, ar, br;
    af.reserve(9 * nt);
    bf.reserve(9 * nt);
    ar.reserve(9 * nt);
    br.reserve(9 * nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        const auto& m = elements[t];
        for (int i = 0; i < 3; ++i) {
            const int vi = tri[static_cast<std::size_t>(i)];
            const int ri = sys.index_map[static_cast<std::size_t>(vi)];
            for (int j = 0; j < 3; ++j) {
                const int vj = tri[static_cast<std::size_t>(j)];
                const int rj = sys.index_map[static_cast<std::size_t>(vj)];
                const double a = m.a[static_cast<std::size_t>(3 * i + j)];
                const double b = m.b[static_cast<std::size_t>(3 * i + j)];
                af.emplace_back(vi, vj, a);
                bf.emplace_back(vi, vj, b);
                if (ri >= 0 && rj >= 0) {
                    ar.emplace_back(ri, rj, a);
                    br.emplace_back(ri, rj, b);
                }
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(nv);
    const auto nr = static_cast<Eigen::Index>(sys.dofs.size());
    sys.A_full.resize(n, n);
    sys.B_full.resize(n, n);
    sys.A.resize(nr, nr);
    sys.B.resize(nr, nr);
    sys.A_full.setFromTriplets(af.begin(), af.end());
    sys.B_full.setFromTriplets(bf.begin(), bf.end());
    sys.A.setFromTriplets(ar.begin(), ar.end());
    sys.B.setFromTriplets(br.begin(), br.end());
    sys.mesh = std::make_shared<const TriMesh>(mesh);
    return sys;
}

AssembledSystem assemble(const WeightedProblem& problem, const TriMesh& mesh) {
    auto sys = assemble_coefficients(mesh, problem.bc, problem_coefficients(problem, mesh), true);
    return sys;
}

AssembledSystem assemble_serial(const WeightedProblem& problem, const TriMesh& mesh) {
    return assemble_coefficients(mesh, problem.bc, problem_coefficients(problem, mesh), false);
}

void write_coo(const SparseMatrix& m, std::ostream& out) {
    out.precision(17);
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
}

}  // namespace confgap
