#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "llab/atom_model.hpp"
#include "llab/fgr.hpp"
#include "llab/liouvillian.hpp"
#include "llab/thermal_field.hpp"

namespace llab {

using json = nlohmann::json;

struct CouplingConfig {
  bool from_template = true;
  double scale = 1.0;
  bool zero_diagonal = false;
  IndexList dark_levels;  // discrete level indices whose coupling is removed
  CMat matrix;            // dense coupling when not templated
  PowerExp form_factor;
};

struct RunConfig {
  AtomSpec atom;
  ContinuumScheme continuum_scheme = ContinuumScheme::uniform;
  IndexList coupled_levels;
  WindowSpec window;
  double u_max = 0.0;
  int n_u = 0;
  int n_max = 1;
  std::vector<CouplingConfig> couplings;

  double beta = 1.0;
  std::vector<double> lambdas;
  std::vector<double> epsilons;
  std::vector<double> betas;  // temperature ladder, may be empty
  double theta = 0.0;
  double delta_width = 0.0;
  double zero_tol = 1e-10;
  double bridge_tol = 0.15;
  double certificate_tol = 0.25;
  PWeight p_weight = PWeight::p_c;
  int gl_order = 16;
  double omega_max = 0.0;
  int max_dense_dim = 3000;
  bool dump_matrices = false;

  std::uint64_t seed = 0;
  std::string outputs = "out";

  json raw;
  std::string hash;
  std::vector<std::string> warnings;
};

// 64-bit FNV-1a of the canonical (sorted-key) serialization, as 16 hex digits.
std::string config_hash(const json& j);

// Validates the whole document and throws one ValidationError listing every problem.
RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);

// The finite model for one inverse temperature.
struct Model {
  RunConfig cfg;
  double beta = 0.0;
  ParticleOperator hp;
  std::vector<ModeLabel> modes;
  std::vector<ParticleOperator> raw_couplings;
  std::vector<ParticleOperator> couplings;  // regularized
  std::vector<FormFactor> form_factors;
  DoubledGrid grid;
  FockSpace fock{1, 1};
  TriSpace space;
  InteractionData data;
  LiouvilleOperator l0;
  LiouvilleOperator interaction;
  RVec l0_diag;
  RVec number_diag;
  ProjectionKit kit;

  FgrModel fgr_model() const;
  FgrParams fgr_params(double eps) const;
  SpMat L(double lambda) const;
};

Model build_model(const RunConfig& cfg, double beta);
Model build_model(const RunConfig& cfg);

// Count of pairs (m, n) of basis levels with E(m) = E(n).
int degenerate_pair_count(const ParticleOperator& hp, double cluster_tol = 1e-9);

}  // namespace llab
