#pragma once

#include <string>
#include <vector>

#include "llab/atom_model.hpp"
#include "llab/linalg.hpp"
#include "llab/liouvillian.hpp"
#include "llab/thermal_field.hpp"
#include "llab/types.hpp"

namespace llab {

// i (L A - A L)
SpMat commutator(const SpMat& l, const SpMat& a);

// Largest |eigenvalue| of a Hermitian sparse matrix by power iteration.
double spectral_norm(const SpMat& a, int iterations = 300);

// 1 (x) 1 (x) X on the TriSpace.
SpMat lift_field(const SpMat& x, int d);

SpMat build_Af(const DoubledGrid& grid, const FockSpace& fock, int d);

// Analytic D = i lambda [I, N]; verified against i(L N - N L), AssemblyError above 1e-10.
SpMat build_D(const InteractionData& data, const DoubledGrid& grid, const FockSpace& fock, double lambda,
              const SpMat& l);

struct C1Result {
  SpMat direct;            // i [L, A_f]
  SpMat analytic;          // N + lambda I_1
  double max_deviation = 0.0;     // max |entry| of direct - analytic
  double smooth_deviation = 0.0;  // ||(direct - analytic) psi|| on a Gaussian one-photon probe
  double lambda_part_deviation = 0.0;  // interaction parts compared alone
};

C1Result build_C1(const SpMat& l, const SpMat& l0, const SpMat& af, const InteractionData& data,
                  const DoubledGrid& grid, const FockSpace& fock, double lambda);

struct ConjugateKit {
  SpMat a_f;
  SpMat a_0;
  double theta = 0.0;
  double eps = 0.0;
  RVec r2;  // diagonal of (L_0^2 + eps^2)^{-1}
  double r2_residual = 0.0;
};

SpMat build_A0(const SpMat& interaction, const ProjectionKit& kit, const RVec& r2, double theta, double lambda);

ConjugateKit conjugate_kit(const SpMat& af, const SpMat& interaction, const ProjectionKit& kit, const RVec& l0_diag,
                           double theta, double eps, double lambda);

// || i Pi [L, A_0] Pi - 2 theta lambda^2 Pi I Rbar^2 I Pi ||_F
double a0_identity_defect(const SpMat& l, const ConjugateKit& ck, const SpMat& interaction, const ProjectionKit& kit,
                          double lambda);

// Pi (M - M Pibar (Pibar M Pibar - m)^{-1} Pibar M) Pi on Ran Pi.
CMat feshbach_map(const CMat& m, const IndexList& pi, cplx z, double resolvent_tol = 1e-10);

struct Certificates {
  SpMat b;
  SpMat m0;
  SpMat m1;
  SpMat commutator_a0;  // i [L, A_0]
  double pm1p_norm = 0.0;
};

Certificates assemble_certificates(const SpMat& l, const SpMat& c1, const ConjugateKit& ck, const ProjectionKit& kit,
                                   const ParticleOperator& hp, const WindowSpec& w, int fock_dim, double lambda);

struct CertificateReport {
  std::string name;
  std::string inequality;
  double lambda_min = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  double lambda = 0.0, theta = 0.0, eps = 0.0, delta_width = 0.0, gamma = 0.0, tol = 0.25;
  int block_dimension = 0;
  bool pass = false;
  bool degenerate = false;
  std::vector<std::string> warnings;
};

// Advisory checks of the parameter regime in which the gap estimate is proven.
std::vector<std::string> regime_warnings(const WindowSpec& w, double theta, double eps, double lambda);

CertificateReport certify_gap(const SpMat& m0, const ProjectionKit& kit, double gamma, double lambda, double theta,
                              double eps, double tol = 0.25);

struct EigendiagRow {
  double eigenvalue = 0.0;
  double number_bound = 0.0;
  double vacuum_complement = 0.0;
  double distance_to_ker_l0 = 0.0;
  std::vector<double> virial;  // <psi, i[L, A] psi> per supplied commutator
};

struct EigendiagReport {
  std::vector<EigendiagRow> rows;
  double max_number_bound = 0.0;             // over vacuum-branch eigenvectors
  double min_distance_to_kernel = 0.0;
  double max_virial = 0.0;
};

// Vacuum-branch eigenvectors are those with ||P_Omega psi||^2 >= 1/2.
EigendiagReport eigen_diagnostics(const HermitianEigen& eig, const IndexList& block, const RVec& l0_diag,
                                  const ProjectionKit& kit, const RVec& number_diag,
                                  const std::vector<SpMat>& commutators, double kernel_tol = 1e-10);

struct LinearFit {
  double k = 0.0;
  double r2 = 0.0;
};
// y = k x through the origin; R^2 against the mean.
LinearFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y);
// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace llab
