#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "llab/atom_model.hpp"
#include "llab/liouvillian.hpp"
#include "llab/thermal_field.hpp"
#include "llab/types.hpp"

namespace llab {

inline constexpr double kIsotropicAngularFactor = 4.0 * M_PI;

enum class PWeight { p_c, mu2 };

struct FgrParams {
  double eps = 0.1;
  double omega_max = 0.0;  // <= 0: -E + 40/beta
  int gl_order = 16;       // nodes per panel; panels are no wider than eps
  double angular_factor = kIsotropicAngularFactor;
  double convergence_tol = 0.01;
};

// Everything the rate computations need about the atom and its couplings.
struct FgrModel {
  ParticleOperator hp;
  std::vector<ParticleOperator> couplings;
  std::vector<FormFactor> form_factors;
  RVec p_weight;  // diagonal of p_c or mu(H_p)^2
};

RVec p_weight_diagonal(const ParticleOperator& hp, const std::vector<ModeLabel>& modes, PWeight kind,
                       const WindowSpec* window);

// F(w) = sum_alpha g_alpha(w) G_alpha
ParticleOperator coupling_at(const FgrModel& m, double w);

ParticleOperator transition_kernel(double w, double e, const ParticleOperator& f_matrix, const ParticleOperator& hp,
                                   const RVec& p_weight, double eps,
                                   double angular_factor = kIsotropicAngularFactor);

double default_omega_max(double e, double beta);

// Planck-weighted FGR matrix on the basis indices `eigenspace` of eigenvalue e.
// Throws AccuracyError when halving the panel width moves the result by more than the tolerance.
CMat fgr_matrix(double e, const IndexList& eigenspace, const FgrModel& m, const FgrParams& params, double beta);

double gamma_of(const CMat& fgr);

// Independent matrix from adaptive quadrature over the doubled line, level by level.
CMat oracle_fgr_matrix(double e, const IndexList& eigenspace, const FgrModel& m, const FgrParams& params,
                       double beta);

struct RateEntry {
  double energy = 0.0;
  double gamma = 0.0;
  int rank = 0;
  CMat matrix;
  double ionization_time = 0.0;
};

struct RateReport {
  std::vector<RateEntry> entries;
  double gamma = 0.0;
};

// One entry per distinct coupled discrete eigenvalue; eigenspaces are restricted to J_d.
RateReport rate_report(const FgrModel& m, const std::vector<ModeLabel>& modes, const WindowSpec& window,
                       const FgrParams& params, double beta, double lambda, bool use_oracle = false);

double gamma_overall(const RateReport& r);

double ionization_time_estimate(double gamma_e, double lambda);

struct TemperatureSweep {
  std::vector<double> betas;
  std::vector<double> gammas;
  std::vector<double> excluded_betas;
  double slope = 0.0;
  double intercept = 0.0;
  double relative_slope_error = 0.0;
  double k = 0.0;
  std::vector<bool> lower_bound_ok;
  bool two_sided_ok = false;
};

TemperatureSweep temperature_sweep(double e, const std::vector<double>& betas, const std::vector<double>& gammas);

struct BridgeRecord {
  double lambda_min = 0.0;
  double gamma_over_eps = 0.0;
  double ratio = 0.0;
  double tol = 0.15;
  bool pass = false;
};

// Smallest eigenvalue of Pi I Rbar^2 I Pi on Ran Pi against gamma/eps.
BridgeRecord oracle_fgr_bound(const SpMat& interaction, const ProjectionKit& kit, const RVec& l0_diag, double gamma,
                              double eps, double tol = 0.15);

// sum_k w_k eps / ((x_k - c)^2 + eps^2)
double lorentzian_mass(const std::vector<double>& nodes, const std::vector<double>& weights, double center,
                       double eps);

}  // namespace llab
