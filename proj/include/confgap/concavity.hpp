#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "confgap/eigensolver.hpp"

namespace confgap {

/// Local polynomial reconstruction at one vertex.
struct LocalFit {
    int vertex = -1;
    Point x{};
    double value = 0.0;
    Vec2 gradient{};
    SymMatrix2 hessian{};
};

struct FitOptions {
    /// Use a cubic model when the patch has enough points; quadratic otherwise.
    bool prefer_cubic = false;
    /// Smallest admissible singular value ratio of the scaled design matrix.
    double rank_tolerance = 1e-9;
    /// log_hessian_field only: fit log u1 itself instead of u1. The log of a
    /// Dirichlet eigenfunction is singular at the boundary, so the default
    /// fits u1 (boundary zeros included) and applies the chain rule.
    bool fit_log_values = false;
};

struct FitSet {
    std::vector<LocalFit> fits;
    std::size_t candidates = 0;
    std::size_t dropped = 0;  // rank-deficient or undersized patches
};

/// Weighted least-squares fits of nodal values over the two-ring patch of
/// every vertex in `vertices`. Patch points with non-finite values are
/// skipped; at least six samples are required.
FitSet fit_local_polynomials(const TriMesh& mesh, const Eigen::VectorXd& values, const std::vector<int>& vertices,
                             const FitOptions& options = {});
FitSet fit_local_polynomials_serial(const TriMesh& mesh, const Eigen::VectorXd& values,
                                    const std::vector<int>& vertices, const FitOptions& options = {});

/// Distance of every vertex to the mesh's boundary polyline.
std::vector<double> boundary_distances(const TriMesh& mesh);

struct LogHessianSample {
    int vertex = -1;
    Point x{};
    double v = 0.0;
    Vec2 grad{};          // flat differential of v
    SymMatrix2 hess_flat{};
    SymMatrix2 hess{};    // with respect to the connection metric
    double phi = 0.0;     // log-factor of the connection at x
    Vec2 grad_phi{};
};

struct LogHessianField {
    std::vector<LogHessianSample> samples;
    ConformalChart connection;
    double exclusion_margin = 0.0;
    std::size_t candidates = 0;
    std::size_t dropped = 0;
    double h_max = 0.0;

    bool inconclusive() const { return samples.empty() || dropped * 10 > candidates; }
};

/// Default exclusion margin max(2 h, D / 50), D the chart-coordinate diameter of the mesh boundary.
double default_exclusion_margin(const TriMesh& mesh);

/// v = log u1 and its derivatives at interior vertices at least `margin`
/// from the boundary (default_exclusion_margin when unset), from
/// grad v = grad u / u and Hess v = Hess u / u - grad v (x) grad v. The connection
/// Hessian is Hess_flat v - (dphi (x) dv + dv (x) dphi) + (dphi . dv) I.
LogHessianField log_hessian_field(const EigenResult& result, const TriMesh& mesh, const ConformalChart& connection,
                                  std::optional<double> margin = {}, const FitOptions& options = {});
LogHessianField log_hessian_field_serial(const EigenResult& result, const TriMesh& mesh,
                                         const ConformalChart& connection, std::optional<double> margin = {},
                                         const FitOptions& options = {});

/// Flat Hessian recovered from a connection Hessian; inverse of conformal_hessian with g = I.
SymMatrix2 flat_hessian_from_connection(const SymMatrix2& hess_connection, Vec2 grad_v, Vec2 grad_phi);

enum class Verdict { Concave, Violated, InconclusiveMargin };
std::string to_string(Verdict v);

struct ConcavityReport {
    double max_hess_eig = 0.0;   // eigenvalue relative to the connection metric
    Point worst_point{};
    Vec2 worst_direction{};      // flat unit vector
    std::string b_used;
    Verdict verdict = Verdict::InconclusiveMargin;
    double tolerance = 0.0;
    double exclusion_margin = 0.0;
    std::size_t retained = 0;
    std::size_t dropped = 0;
};

/// Relative scale of the verdict threshold: tol = scale * max |entry of Hess v| (metric-normalized).
inline constexpr double kConcavityToleranceScale = 1e-3;

/// Largest eigenvalue of Hess v + b g over the retained vertices.
ConcavityReport concavity_report(const LogHessianField& field, const ScalarField& b = ScalarField::constant(0.0),
                                 double tolerance_scale = kConcavityToleranceScale);

/// Every symbol of the barrier operator at one point, in a frame that is
/// orthonormal for the connection metric.
struct BarrierState {
    Point point{};
    Vec2 X{1.0, 0.0};
    double b = 0.0;
    Vec2 grad_b{};
    double lap_b = 0.0;
    Vec2 grad_v{};
    SymMatrix2 hess_v{};
    double lambda = 0.0;
    double rho = 0.0;
    double V = 0.0;
    double rho_XX = 0.0;
    double V_XX = 0.0;
    double K = 0.0;
};

/// -2b^2 + 2<grad b, grad v> - 2K(|grad v|^2 + Lap v - v_X^2 - v_XX) + Lap b
///   - lambda rho_XX + V_XX.
/// With eliminate_laplacian the Laplacian of v is replaced by V - lambda rho - |grad v|^2.
double barrier_operator(const BarrierState& state, bool eliminate_laplacian = true);
/// Same, refusing connections that are not space forms.
double barrier_operator(const ConformalChart& connection, const BarrierState& state, bool eliminate_laplacian = true);

/// b = 0 value of the barrier along rho(t) = t rho + (1 - t), V(t) = t V:
/// t lambda (2K rho - rho_XX) + 2K v_X^2 + 2K lambda (1 - t) + t (V_XX - 2K V).
double barrier_family_closed_form(double t, double lambda, double rho, double rho_XX, double V, double V_XX,
                                  double v_X, double K);

/// Builds a barrier state from a log-Hessian sample and connection-relative
/// fields, converting every tensor to the orthonormal frame.
BarrierState barrier_state_from_sample(const ConformalChart& connection, const LogHessianSample& sample,
                                       Vec2 X_flat, double lambda, const ScalarField& rho_connection,
                                       const ScalarField& V_connection, const ScalarField& b);

/// Connection-metric Hessian of a field, expressed in the orthonormal frame.
SymMatrix2 orthonormal_hessian(const ConformalChart& connection, const ScalarField& f, Point x);

struct LogEquationResidual {
    double mean_abs = 0.0;
    double max_abs = 0.0;
    std::size_t samples = 0;
};

/// |grad v|^2 + Lap v - (V - lambda rho) at the retained vertices, all
/// quantities relative to the connection metric; V, rho are the flat-chart
/// problem coefficients.
LogEquationResidual log_equation_residual(const LogHessianField& field, double lambda, const ScalarField& V_flat,
                           const ScalarField& rho_flat);

struct ConditionCheck {
    bool holds = false;
    double worst_margin = 0.0;
    Point worst_point{};
    std::size_t samples = 0;
};

/// Minimum over sample points of the smallest eigenvalue of
/// Hess W - 2K W g, W = V - lambda_t rho, in the connection's orthonormal
/// frame. V and rho are relative to the connection metric. Samples: the
/// boundary vertices plus a lattice of about `samples` interior points.
ConditionCheck check_space_form_condition(const ScalarField& V, const ScalarField& rho, double lambda_t,
                                     const ConformalChart& connection, const Domain2D& domain, int samples);
/// Model chart of curvature K: sphere for K > 0, plane for 0, Poincare disk for -1.
ConditionCheck check_space_form_condition(const ScalarField& V, const ScalarField& rho, double lambda_t, double K,
                                     const Domain2D& domain, int samples);

struct SweepPoint {
    double t = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double gap = 0.0;
    ConcavityReport report;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::optional<double> first_violation;
};

struct SweepOptions {
    double h = 0.02;
    std::optional<double> margin;
    MeshOptions mesh;
    SolverOptions solver;
};

/// Solves the family rho_c(t) = t rho_c + (1 - t), V_c(t) = t V_c (both
/// relative to the connection) for every t of the grid and reports
/// concavity of log u1 with respect to the connection. Grid points run in
/// parallel; output order follows t_grid.
SweepResult continuity_sweep(const WeightedProblem& base, const std::vector<double>& t_grid,
                             const ConformalChart& connection, const ScalarField& b, const SweepOptions& options = {});

/// Rows: t,lambda1,lambda2,gap,max_hess_eig,verdict.
void write_sweep_csv(const SweepResult& sweep, std::ostream& out);
/// Rows: x,y,v,v1,v2,h11,h12,h22 (connection Hessian).
void write_field_csv(const LogHessianField& field, std::ostream& out);

}  // namespace confgap
