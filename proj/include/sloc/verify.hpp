#pragma once

#include <string>
#include <vector>
#include <Eigen/Dense>

#include "sloc/channel.hpp"
#include "sloc/linalg.hpp"
#include "sloc/mc.hpp"
#include "sloc/measure.hpp"

namespace sloc::verify {

// Numerical tolerance added on top of the 3-sigma confidence slack, so a
// statistical failure is never confused with rounding.
inline constexpr double kReportTol = 1e-9;

// Loewner or scalar inequality verdict. pass <=> slack + ci_slack >= -kReportTol,
// where ci_slack is the 3-sigma allowance propagated from batch standard
// errors (Frobenius-aggregated for matrix estimates).
struct InequalityReport {
  std::string which;       // "cov1" | "entropy" | "cov2"
  Eigen::MatrixXd lhs;     // estimate (1x1 for scalars)
  Eigen::MatrixXd rhs;     // bound
  double slack = 0.0;
  double ci_slack = 0.0;
  bool pass = false;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

// E_theta Cov(mu_theta), batch-mean Monte Carlo over channel draws.
McEstimate<Eigen::MatrixXd> estimate_mixture_cov(const measures::DiscreteMeasure& mu,
                                                 const linalg::PsdMatrix& q, const McConfig& cfg);

// E_theta { Cov(mu_theta) Q^-1 Cov(mu_theta) }.
McEstimate<Eigen::MatrixXd> estimate_cov_qcov(const measures::DiscreteMeasure& mu,
                                              const linalg::PsdMatrix& q, const McConfig& cfg);

// I(theta; x) = E_theta D(mu_theta || mu); every sample is a KL value >= 0.
McEstimate<double> estimate_mutual_information(const measures::DiscreteMeasure& mu,
                                               const linalg::PsdMatrix& q, const McConfig& cfg);

// 0.5 * log det(I + 2 Q^-1 Cov(mu)).
double entropy_upper_bound(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q);

// E |x - E[x|y_t]|^2_R at fixed t. t = 0 is exact: Tr(R Cov(mu)), no sampling.
McEstimate<double> mmse(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q, double t,
                        const linalg::PsdMatrix& r, const McConfig& cfg);

struct DerivativeCheck {
  double fd = 0.0;     // central finite difference of mmse at t (common random numbers)
  double fd_se = 0.0;
  McEstimate<double> identity_rhs;  // -E Tr{Cov(mu_t) Q^-1 Cov(mu_t) R}
  bool agree = false;
};

// Checks d/dt mmse(t) against the trace identity. delta must lie in
// [1e-4, 0.1] and t - delta must be >= 0.
DerivativeCheck mmse_derivative_check(const measures::DiscreteMeasure& mu,
                                      const linalg::PsdMatrix& q, double t,
                                      const linalg::PsdMatrix& r, double delta,
                                      const McConfig& cfg);

struct IntegratedIdentityCheck {
  McEstimate<double> integral;  // int_1^2 E Tr{Cov Q^-1 Cov R} dt, via tau ~ Unif[1,2]
  McEstimate<double> mmse1;
  McEstimate<double> mmse2;
  double trace_bound = 0.0;  // Tr(R Cov(mu))
  bool pass = false;
};

IntegratedIdentityCheck integrated_identity_check(const measures::DiscreteMeasure& mu,
                                                  const linalg::PsdMatrix& q,
                                                  const linalg::PsdMatrix& r, const McConfig& cfg);

struct SweepPoint {
  double t = 0.0;
  bool cov1 = false;
  bool entropy = false;
  bool cov2 = false;
  bool all() const { return cov1 && entropy && cov2; }
};

struct SweepReport {
  std::vector<SweepPoint> points;
  double pass_fraction = 0.0;
  double guaranteed_fraction = 0.0;  // 1 - 3/M
};

// Fixed-t relaxation: at each grid point checks the three inequalities with
// their bounds inflated by M. Grid must lie in [1,2] and M > 3.
SweepReport fixed_t_sweep(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q,
                          const std::vector<double>& grid, double big_m, const McConfig& cfg);

struct TheoremReport {
  InequalityReport cov1;
  InequalityReport entropy;
  InequalityReport cov2;
  bool all_pass = false;
};

// Runs the three estimators and assembles the three inequality reports
// against Q, the entropy bound, and Cov(mu).
TheoremReport verify_theorem(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q,
                             const McConfig& cfg);

// Report assembly, exposed so the harness self-tests can inject corrupted
// bounds and confirm the checker rejects them.
InequalityReport make_loewner_report(const std::string& which,
                                     const McEstimate<Eigen::MatrixXd>& lhs,
                                     const Eigen::MatrixXd& rhs_bound);
InequalityReport make_entropy_report(const McEstimate<double>& mi, double upper_bound);

}  // namespace sloc::verify
