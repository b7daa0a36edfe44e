#pragma once

#include <map>
#include <optional>
#include <vector>

#include "llab/types.hpp"

namespace llab {

// 1/(e^{beta w} - 1); log-space tail for beta*w > 30.
double planck_weight(double w, double beta);

struct RadialGrid {
  RVec nodes;
  RVec weights;
};

struct DoubledGrid {
  RVec nodes;
  RVec weights;
  double spacing = 0.0;  // > 0 iff uniform

  int size() const { return static_cast<int>(nodes.size()); }
  bool uniform() const { return spacing > 0; }
  // Positive nodes with their weights, ascending.
  RadialGrid positive_half() const;
  // Index of the node mirrored under u -> -u.
  int mirror(int j) const { return size() - 1 - j; }
};

// Midpoint nodes u_j = -u_max + (j + 1/2) h, h = 2 u_max / n_u; n_u even so 0 is excluded.
DoubledGrid make_doubled_grid(double u_max, int n_u);

void validate(const DoubledGrid& g);

struct PowerExp {
  double p = 3.0;
  double lambda = 1.0;
  double amplitude = 1.0;
};

struct FormFactor {
  RadialGrid grid;
  CVec samples;
  double ir_exponent = 0.0;
  double uv_exponent = 0.0;
  std::optional<PowerExp> analytic;

  // Analytic template if present, otherwise linear interpolation of the samples (0 outside).
  cplx operator()(double w) const;
};

FormFactor power_exp_form_factor(const RadialGrid& grid, const PowerExp& t);
FormFactor sampled_form_factor(const RadialGrid& grid, CVec samples, double p, double q);

struct EnvelopeCheck {
  bool ir_ok = true;
  bool uv_ok = true;
  double ir_worst = 0.0;  // max |g| / (k2 w^p) below k1
  double uv_worst = 0.0;  // max |g| / (K2 w^-q) above K1
};
EnvelopeCheck check_envelopes(const FormFactor& f, double k1, double k2, double big_k1, double big_k2);

CVec bogoliubov_map(const FormFactor& f, double beta, const DoubledGrid& out);

// e^{-beta u/2} (tau_beta f)(u), evaluated without the overflowing factor.
CVec kms_weighted_bogoliubov(const FormFactor& f, double beta, const DoubledGrid& out);

CVec kms_weighted(const CVec& f, const DoubledGrid& grid, double beta);

// <f, g> on the doubled line with plain du weights.
cplx doubled_inner(const CVec& f, const CVec& g, const DoubledGrid& grid);
// <f, g> on the radial grid with measure w^2 dw.
cplx radial_inner(const CVec& f, const CVec& g, const RadialGrid& grid);

// Occupation-truncated bosonic Fock space. A basis state is the sorted multiset of occupied
// mode indices. Ordering is graded: by total number, then lexicographic on the multiset.
class FockSpace {
 public:
  FockSpace(int mode_count, int n_max);

  int mode_count() const { return m_; }
  int n_max() const { return n_max_; }
  int dimension() const { return static_cast<int>(states_.size()); }
  const std::vector<int>& state(int k) const { return states_[k]; }
  int total_number(int k) const { return static_cast<int>(states_[k].size()); }
  int occupation(int k, int mode) const;
  std::vector<int> occupation_vector(int k) const;
  // -1 if not in the truncated space.
  int index_of(const std::vector<int>& multiset) const;

  static long long expected_dimension(int mode_count, int n_max);

 private:
  int m_, n_max_;
  std::vector<std::vector<int>> states_;
  std::map<std::vector<int>, int> index_;
};

using FieldOperator = SpMat;

// a(f) = sum_j sqrt(w_j) conj(f_j) a_j
FieldOperator annihilator(const CVec& f, const DoubledGrid& grid, const FockSpace& fock);
FieldOperator creator(const CVec& f, const DoubledGrid& grid, const FockSpace& fock);
FieldOperator field_op(const CVec& f, const DoubledGrid& grid, const FockSpace& fock);

// dGamma of a diagonal one-particle operator with values h(u_j).
FieldOperator second_quantize(const RVec& h, const FockSpace& fock);
RVec second_quantize_diagonal(const RVec& h, const FockSpace& fock);
// dGamma of a general one-particle matrix: sum_jk h_jk a_j^* a_k.
FieldOperator second_quantize(const CMat& h, const FockSpace& fock);
FieldOperator number_operator(const FockSpace& fock);

// Central-difference derivative S on a uniform grid, Dirichlet truncation.
CMat central_difference(const DoubledGrid& grid);
// i S: Hermitian one-particle generator of translations.
CMat translation_generator(const DoubledGrid& grid);

}  // namespace llab
