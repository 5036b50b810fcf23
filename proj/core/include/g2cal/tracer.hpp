#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "g2cal/fhn.hpp"

namespace g2cal::tracer {

struct EmptyLevelError : std::domain_error {
  using std::domain_error::domain_error;
};
struct UnclassifiableError : std::domain_error {
  using std::domain_error::domain_error;
};
struct HypothesisFailedError : std::domain_error {
  using std::domain_error::domain_error;
};
struct UnknownCaseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct IoFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Point of the quotient surface B = (0, pi) x Int(I).
struct QuotientPoint {
  double theta;
  double t;
};

enum class CurveKind { kAssociative, kCoassociative };
enum class EndpointTag { kThetaZero, kThetaPi, kSingularOrbit, kConeExit, kDomainEnd };

/// Which function plays the role of nu on B: the FHN quotient value
/// -4 (b - c1) cos(theta), or the Bryant-Salamon table value
/// 2 sqrt3 r^2 cos(theta) = 4 a cos(theta) of the case-0 action.
enum class NuConvention { kFhn, kBsCase0 };

struct LevelSetCurve {
  CurveKind kind;
  double level;
  std::vector<QuotientPoint> points;
  std::array<EndpointTag, 2> endpoints;
  std::string topology;              // filled by classifyAssociative
  bool in_singular_orbit = false;    // zero-section family
  bool s2_component = false;         // K_{m,n}: one of the two S_2 orbits
};

/// Associative level sets |mu| = 4 adot bdot sin(theta) = level, traced by
/// predictor-corrector continuation until an endpoint tag applies. Positive
/// levels give one curve through the apex when inf 4 adot bdot < level, two
/// graph branches otherwise; level = 0 returns the boundary lines theta = 0
/// and theta = pi.
std::vector<LevelSetCurve> traceAssociative(const fhn::Solution& solution, double level,
                                            double step);

/// Coassociative level sets nu = level (single curve; the nu = 0 set is the
/// vertical line theta = pi/2).
LevelSetCurve traceCoassociative(const fhn::Solution& solution, double nu_level, double step,
                                 NuConvention convention = NuConvention::kFhn);

/// The zero-section associatives (solution must extend to the singular
/// orbit): one curve for Delta SU(2) / {1} x SU(2), the fibre family plus the
/// two S_2 components for K_{m,n}.
std::vector<LevelSetCurve> singularOrbitAssociatives(const fhn::Solution& solution);

/// Topology label from the endpoint tags:
///   interior/interior -> T2xR, boundary line reaching the singular orbit ->
///   S1xR2, zero section -> S3 or the K_{m,n} lens spaces.
/// Throws UnclassifiableError (label "unknown/incomplete") on cone exits.
std::string classifyAssociative(const LevelSetCurve& curve, const fhn::Params& params);

enum class FiberStatus {
  kSmoothT3xR,
  kSmoothT2xR2,
  kSingularHLCone,
  kNotThroughSingularSet
};

/// Position of a T^3-fibre target (theta^1_1, theta^2_1, nu) against the
/// explicit singular / one-dimensional-stabilizer loci of the FHN cases.
FiberStatus coassocFiberStatus(const Eigen::Vector3d& target, const fhn::Params& params,
                               double tol = 1e-9);
/// The same for the Bryant-Salamon presentation (case-0 action, parameter c).
FiberStatus bsCoassocFiberStatus(const Eigen::Vector3d& target, double c, double tol = 1e-9);

enum class FibrationStatus { kGlobalFibration, kSplitRequired };

struct FibrationResult {
  FibrationStatus status;
  double u_min, u_max;  // range of u = 4 adot bdot
  double v_min, v_max;  // range of v = |4 (b - c1)|
};

/// Convexity test of the alpha-map image (u sin(theta), v cos(theta)):
/// global fibration iff inf u = 0 (singular-orbit extension present).
/// Throws HypothesisFailedError when udot, vdot change or mismatch sign,
/// reporting the location.
FibrationResult alphaFibrationTest(const fhn::Solution& solution);

/// min over an n x n grid of |udot v sin^2 + u vdot cos^2| (never zero under
/// the lemma hypothesis).
double alphaJacobianMin(const fhn::Solution& solution, int n_grid = 50);

/// Inner product of the B-gradients of |mu| and nu at (theta, t) in the
/// quotient metric dt^2 + G d theta^2 assembled from the 7-dimensional
/// metric, normalized by the gradient norms. Zero by orthogonality of the
/// associative/coassociative parametrization.
double gradientOrthogonalityResidual(const fhn::Solution& solution, double theta, double t);

struct RenderResult {
  int curve_count = 0;
  int point_count = 0;
  /// BS convention only: targets of the singular fibres (+-(3 sqrt3/4) c, 0, 0).
  std::vector<Eigen::Vector3d> singular_fibers;
};

/// Trace both families and write CSV (curve_id, kind, level, theta, t with 12
/// significant digits) and an SVG overlay; singular coassociatives are
/// highlighted. Throws IoFailureError when a file cannot be written.
RenderResult renderLevelsets(const fhn::Solution& solution,
                             const std::vector<double>& mu_levels,
                             const std::vector<double>& nu_levels, const std::string& csv_path,
                             const std::string& svg_path,
                             NuConvention convention = NuConvention::kFhn,
                             std::optional<double> bs_c = std::nullopt);

}  // namespace g2cal::tracer
