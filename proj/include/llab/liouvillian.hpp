#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "llab/atom_model.hpp"
#include "llab/linalg.hpp"
#include "llab/thermal_field.hpp"
#include "llab/types.hpp"

namespace llab {

// H_p (x) H_p (x) F, flat index (i*d + j)*F + k: left atom slowest, Fock fastest.
struct TriSpace {
  int d = 0;
  int fock_dim = 0;

  int dimension() const { return d * d * fock_dim; }
  int index(int i, int j, int k) const { return (i * d + j) * fock_dim + k; }
  void split(int flat, int& i, int& j, int& k) const {
    k = flat % fock_dim;
    const int ij = flat / fock_dim;
    j = ij % d;
    i = ij / d;
  }
};

// Sparse product kron(A, kron(B, C)).
SpMat kron3(const SpMat& a, const SpMat& b, const SpMat& c);
SpMat to_sparse(const CMat& m);

struct LiouvilleOperator {
  SpMat matrix;
  double beta = 0.0;
  double lambda = 0.0;
  std::optional<WindowSpec> window;
};

// Field vectors entering the interaction, one pair per coupling:
// left = sqrt(angular) tau_beta g_alpha, right = sqrt(angular) e^{-beta u/2} tau_beta g_alpha.
struct InteractionData {
  std::vector<ParticleOperator> couplings;  // regularized G_{alpha,J}
  std::vector<CVec> left;
  std::vector<CVec> right;
};

InteractionData interaction_data(const std::vector<ParticleOperator>& couplings,
                                 const std::vector<FormFactor>& form_factors, double beta,
                                 const DoubledGrid& grid, double angular_factor);

LiouvilleOperator assemble_L0(const ParticleOperator& hp, const RVec& dgamma_u_diag, int fock_dim);

// sum_alpha [ G (x) 1 (x) X(left) - 1 (x) C_p G C_p (x) X(right) ] for a field map X.
SpMat assemble_linear(const InteractionData& data, int d,
                      const std::function<SpMat(const CVec&)>& field_map);

LiouvilleOperator assemble_interaction(const InteractionData& data, int d, const DoubledGrid& grid,
                                       const FockSpace& fock, double beta);

LiouvilleOperator assemble_L(const LiouvilleOperator& l0, const LiouvilleOperator& interaction, double lambda);

// Diagonal 0/1 masks over the TriSpace.
struct ProjectionKit {
  RVec pi, p0, p_omega, p, p_left, p_right, p_zero, e_delta;
  double delta_width = 0.0;

  RVec complement(const RVec& m) const { return RVec::Ones(m.size()) - m; }
};

// Largest admissible Delta width: half the smallest gap between distinct J_d energies.
double max_delta_width(const ParticleOperator& hp, const WindowSpec& w, double cluster_tol = 1e-9);

ProjectionKit projection_kit(const ParticleOperator& hp, const std::vector<ModeLabel>& modes,
                             const WindowSpec& w, const FockSpace& fock, const RVec& l0_diag,
                             double delta_width, double cluster_tol = 1e-9);

struct BlockReductionReport {
  double max_commutator = 0.0;  // Frobenius norm, max over P, P^l, P^r, P^0
  double p_zero_defect = 0.0;   // ||L P^0 - L_0 P^0||_F
  bool pass = false;
};

BlockReductionReport block_reduction_check(const SpMat& l, const SpMat& l0, const ProjectionKit& kit,
                                           double tol = 1e-12);

struct KernelCandidate {
  double eigenvalue = 0.0;
  CVec eigenvector;
  double overlap_pi = 0.0;
  double overlap_vacuum_complement = 0.0;
  double overlap_excited = 0.0;
};

struct KernelReport {
  IndexList block;  // TriSpace indices the eigendecomposition ran on
  RVec eigenvalues;
  std::vector<KernelCandidate> candidates;
  double min_abs_eigenvalue = 0.0;
};

// Eigendecomposition of L restricted to `block` (whole space if empty).
KernelReport kernel_report(const SpMat& l, const ProjectionKit& kit, double zero_tol,
                           const IndexList& block = {});

// e^{itL} psi from an eigendecomposition.
CVec evolve(const HermitianEigen& eig, const CVec& psi, double t);
CVec evolve(const CMat& l, const CVec& psi, double t);

}  // namespace llab
