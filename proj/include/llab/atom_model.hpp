#pragma once

#include <string>
#include <vector>

#include "llab/types.hpp"

namespace llab {

enum class ModeKind { discrete, pseudo_continuum };

struct ModeLabel {
  int index = 0;
  ModeKind kind = ModeKind::discrete;
  double energy = 0.0;
};

struct DiscreteLevel {
  double energy = 0.0;
  int degeneracy = 1;
};

enum class ContinuumScheme { gauss_legendre, uniform };

struct Continuum {
  double e_min = 0.0;
  double e_max = 0.0;
  int n_points = 0;
  std::vector<double> nodes;
  std::vector<double> quadrature_weights;
};

// Nodes and weights on [e_min, e_max]. Uniform uses endpoint nodes and trapezoid weights.
Continuum make_continuum(double e_min, double e_max, int n_points, ContinuumScheme scheme);

struct AtomSpec {
  std::vector<DiscreteLevel> discrete_levels;
  Continuum continuum;

  int discrete_dimension() const;
  int dimension() const;
  // One label per basis vector: discrete levels with multiplicity, then pseudo-continuum.
  std::vector<ModeLabel> modes() const;
  // Basis indices belonging to discrete level `level`.
  IndexList basis_of_level(int level) const;
};

void validate(const AtomSpec& spec);

using ParticleOperator = CMat;

struct WindowSpec {
  IndexList coupled_discrete;  // basis indices of J_d
  double r = 0.0;
  double R = 0.0;
  double smoothing_margin = 0.0;
};

void validate(const WindowSpec& w, const AtomSpec& spec, bool require_coupled);

ParticleOperator build_hamiltonian(const AtomSpec& spec);

RVec energies(const ParticleOperator& h);

ParticleOperator spectral_projection(const ParticleOperator& h, double e, double cluster_tol = 1e-9);

// Distinct eigenvalues of a diagonal H after clustering within cluster_tol.
std::vector<double> clustered_eigenvalues(const ParticleOperator& h, double cluster_tol = 1e-9);

// 1 on [r, R], 0 outside (r - margin, R + margin), exp(1 - 1/(1 - s^2)) on the ramps.
double bump_profile(double e, double r, double R, double margin);

ParticleOperator mollified_indicator(const ParticleOperator& h, const WindowSpec& w);

// p_{J_d} as a diagonal 0/1 matrix.
ParticleOperator discrete_window_projection(int dim, const WindowSpec& w);

// p_{J_c}: pseudo-continuum levels inside the open interval (r - margin, R + margin).
ParticleOperator continuum_window_projection(const ParticleOperator& h, const WindowSpec& w);

ParticleOperator regularize_coupling(const ParticleOperator& g, const ParticleOperator& h,
                                     const WindowSpec& w, const std::vector<ModeLabel>& modes);

ParticleOperator cp_conjugate(const ParticleOperator& x);

// G_mn = scale / (1 + |E(m) - E(n)|)
ParticleOperator dipole_like_coupling(const ParticleOperator& h, double scale = 1.0,
                                      bool zero_diagonal = false);

// Zeroes row and column of each listed basis index (dark-state construction).
ParticleOperator decouple(const ParticleOperator& g, const IndexList& basis);

}  // namespace llab
