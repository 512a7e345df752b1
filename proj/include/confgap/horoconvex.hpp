#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "confgap/concavity.hpp"

namespace confgap {

/// sqrt(7 - sqrt(33)) / 2.
double optimal_sphere_radius();

/// (R^2 + |x|^2)^2 / (R^4 (1 - |x|^2)^2): the hyperbolic weight measured against the sphere of radius R.
double rho_hyper_to_sphere(Point x, double R);
ScalarField rho_hyper_to_sphere_field(double R);

/// Closed-form Hessian of rho_hyper_to_sphere for the sphere connection:
/// 4(1+R^2) / (R^4 (1-|x|^2)^4) [5x1^2 - x2^2 + R^2(1 + 5x1^2 - x2^2) + |x|^4, 6(1+R^2) x1 x2; ...].
SymMatrix2 spherical_hessian_rho(Point x, double R);

struct MuPair {
    double mu1 = 0.0;  // tangential
    double mu2 = 0.0;  // radial
};

MuPair mu_eigenvalues(double r, double R);
/// mu_i divided by K rho e^{2 phi}; admissibility is max <= 2.
MuPair normalized_mu(double r, double R);

struct AdmissibleRadius {
    double r_max = 0.0;
    double r_max_sq = 0.0;
    /// normalized mu1 < 2 on a 1000-point grid of [0, r_max]
    bool mu1_below_two = false;
};

/// Positive root of normalized mu2 = 2 in r^2:
/// (-5 - 5R^4 - 14R^2 + (1+R^2) sqrt(25 + 94R^2 + 25R^4)) / (2 - 2R^2). DomainError unless 0 < R < 1.
AdmissibleRadius admissible_radius(double R);

struct OptimalRadius {
    double closed_form = 0.0;
    double golden_section = 0.0;
    int iterations = 0;
};

/// Closed form and golden-section argmax of admissible_radius over (0.01, 0.99).
OptimalRadius optimal_R();

/// 32 / (3 (7 + sqrt(33))).
double gap_bound_coefficient();
/// 4/3.
double gap_bound_constant();
/// 2 arccsch(2 sqrt(11/3)).
double diameter_threshold();

/// gap_bound_coefficient() pi^2 / D^2 + 4/3. ThresholdError unless 0 < D < diameter_threshold().
double gap_lower_bound(double D);

/// Ingredients of the bound (1/|rho|_inf)(pi^2/D^2 + K/2) for a given sphere radius,
/// with |rho|_inf the sup of rho_hyper_to_sphere over the admissible ball.
struct GapBoundIngredients {
    double R = 0.0;
    double K = 0.0;
    double r_max = 0.0;
    double rho_sup = 0.0;
    double coefficient = 0.0;  // 1 / rho_sup
    double constant = 0.0;     // K / (2 rho_sup)
};
GapBoundIngredients gap_bound_ingredients(double R);

struct Step2Margin {
    double value = 0.0;
    bool warning = false;  // r >= 1/2: the bound is no longer positive
};

/// e^{-phi(r)} (1 - 2r) / (1/2 + r)^2 with phi(r) = log(2R^2 / (R^2 + r^2)). DomainError unless r >= 0, R > 1/2.
Step2Margin step2_margin(double r, double R);

struct HoroconvexConfig {
    double R = 0.0;
    double r_max = 0.0;
    double C_max = 0.0;  // 2 artanh(r_max)
    double D_max = 0.0;  // dekster_min_diameter(C_max)

    static HoroconvexConfig from_radius(double R);
    static HoroconvexConfig standard() { return from_radius(optimal_sphere_radius()); }
};

struct StageResult {
    std::string name;
    bool passed = false;
    std::string message;
    std::vector<std::pair<std::string, double>> values;
};

struct PipelineOptions {
    double h = 0.01;
    HoroconvexConfig config = HoroconvexConfig::standard();
    MeshOptions mesh;
    SolverOptions solver;
    std::optional<double> margin;
};

struct PipelineReport {
    std::vector<StageResult> stages;
    bool passed = false;
    /// Name of the first failing stage, empty when every stage passed.
    std::string failed_stage;
    double diameter = 0.0;  // hyperbolic
    double bound = 0.0;
    std::optional<GapResult> gap;
    std::optional<ConcavityReport> concavity;
};

inline constexpr const char* kStageNames[] = {"threshold", "recenter", "containment", "sphere-convexity",
                                              "solve",     "concavity", "gap-bound"};

/// Runs the horoconvex gap pipeline on a Poincare-disk domain: certification and
/// diameter threshold, Mobius recentering at the circumcenter, containment in
/// B_{r_max}, convexity for the sphere of radius R, the hyperbolic Dirichlet
/// problem (rho = 4/(1-|x|^2)^2 in the flat chart) at h and h/2, log-concavity
/// for the sphere connection, and the gap bound against the extrapolated gap.
/// Stops at the first failing stage.
PipelineReport verify_pipeline(const Domain2D& domain, const PipelineOptions& options = {});

/// Lens bounded by two mirror circular arcs of constant hyperbolic curvature
/// alpha through the points +-tanh(D/4) on the real axis.
Domain2D hyperbolic_lens(double D, double alpha, int n_per_arc);

struct ConvexityClassPoint {
    double D = 0.0;
    double alpha = 0.0;
    double diameter = 0.0;
    double min_curvature = 0.0;
    bool sphere_convex = false;
    double gap = 0.0;
    double scaled_gap = 0.0;  // gap * diameter^2
};

/// Exploratory sweep over the lens family; h is relative to the chart radius tanh(D/4).
std::vector<ConvexityClassPoint> convexity_class_sweep(const std::vector<double>& diameters,
                                                       const std::vector<double>& alphas, double relative_h,
                                                       const SolverOptions& solver = {});
/// Rows: D,alpha,diameter,min_curvature,sphere_convex,gap,scaled_gap.
void write_convexity_class_csv(const std::vector<ConvexityClassPoint>& rows, std::ostream& out);

}  // namespace confgap
