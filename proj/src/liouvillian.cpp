#include "llab/liouvillian.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "llab/errors.hpp"

namespace llab {

SpMat kron3(const SpMat& a, const SpMat& b, const SpMat& c) {
  SpMat bc = Eigen::kroneckerProduct(b, c).eval();
  SpMat out = Eigen::kroneckerProduct(a, bc).eval();
  return out;
}

SpMat to_sparse(const CMat& m) {
  SpMat s = m.sparseView();
  s.prune(cplx(0.0));
  return s;
}

namespace {
SpMat identity(int n) {
  SpMat i(n, n);
  i.setIdentity();
  return i;
}
}  // namespace

InteractionData interaction_data(const std::vector<ParticleOperator>& couplings,
                                 const std::vector<FormFactor>& form_factors, double beta,
                                 const DoubledGrid& grid, double angular_factor) {
  if (couplings.size() != form_factors.size())
    throw ValidationError("number of couplings and form factors differ");
  InteractionData data;
  data.couplings = couplings;
  const double s = std::sqrt(angular_factor);
  for (const auto& f : form_factors) {
    data.left.push_back(s * bogoliubov_map(f, beta, grid));
    data.right.push_back(s * kms_weighted_bogoliubov(f, beta, grid));
  }
  return data;
}

LiouvilleOperator assemble_L0(const ParticleOperator& hp, const RVec& dgamma_u_diag, int fock_dim) {
  if (dgamma_u_diag.size() != fock_dim) throw ValidationError("assemble_L0: Fock dimension mismatch");
  const RVec e = energies(hp);
  const TriSpace s{static_cast<int>(e.size()), fock_dim};
  RVec d(s.dimension());
  for (int i = 0; i < s.d; ++i)
    for (int j = 0; j < s.d; ++j)
      for (int k = 0; k < fock_dim; ++k) d[s.index(i, j, k)] = (e[i] - e[j]) + dgamma_u_diag[k];
  LiouvilleOperator l;
  l.matrix = diagonal(d);
  return l;
}

SpMat assemble_linear(const InteractionData& data, int d,
                      const std::function<SpMat(const CVec&)>& field_map) {
  SpMat out;
  const SpMat id = identity(d);
  for (std::size_t a = 0; a < data.couplings.size(); ++a) {
    const SpMat g = to_sparse(data.couplings[a]);
    const SpMat gc = to_sparse(cp_conjugate(data.couplings[a]));
    SpMat term = kron3(g, id, field_map(data.left[a])) - kron3(id, gc, field_map(data.right[a]));
    out = a == 0 ? term : SpMat(out + term);
  }
  return out;
}

LiouvilleOperator assemble_interaction(const InteractionData& data, int d, const DoubledGrid& grid,
                                       const FockSpace& fock, double beta) {
  LiouvilleOperator l;
  l.beta = beta;
  if (data.couplings.empty()) {
    l.matrix = SpMat(d * d * fock.dimension(), d * d * fock.dimension());
    return l;
  }
  for (const auto& g : data.couplings)
    if (g.rows() != d) throw ValidationError("assemble_interaction: coupling dimension mismatch");
  SpMat m = assemble_linear(data, d, [&](const CVec& f) { return field_op(f, grid, fock); });
  l.matrix = hermitize(m);
  return l;
}

LiouvilleOperator assemble_L(const LiouvilleOperator& l0, const LiouvilleOperator& interaction, double lambda) {
  LiouvilleOperator l = interaction;
  l.lambda = lambda;
  l.window = l0.window ? l0.window : interaction.window;
  if (lambda == 0.0) {
    l.matrix = l0.matrix;
    return l;
  }
  l.matrix = l0.matrix + lambda * interaction.matrix;
  return l;
}

double max_delta_width(const ParticleOperator& hp, const WindowSpec& w, double cluster_tol) {
  const RVec e = energies(hp);
  std::vector<double> ev;
  for (int i : w.coupled_discrete) ev.push_back(e[i]);
  std::sort(ev.begin(), ev.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t a = 1; a < ev.size(); ++a)
    if (ev[a] - ev[a - 1] > cluster_tol) gap = std::min(gap, ev[a] - ev[a - 1]);
  return gap / 2;
}

ProjectionKit projection_kit(const ParticleOperator& hp, const std::vector<ModeLabel>& modes,
                             const WindowSpec& w, const FockSpace& fock, const RVec& l0_diag,
                             double delta_width, double cluster_tol) {
  const double limit = max_delta_width(hp, w, cluster_tol);
  if (!(delta_width > 0) || !(delta_width < limit)) {
    std::ostringstream os;
    os << "Delta width " << delta_width << " violates the interval condition: must be in (0, " << limit
       << "), half the smallest gap between distinct coupled discrete energies";
    throw ValidationError(os.str());
  }
  const RVec e = energies(hp);
  const int d = static_cast<int>(e.size());
  const TriSpace s{d, fock.dimension()};
  if (l0_diag.size() != s.dimension()) throw ValidationError("projection_kit: L_0 dimension mismatch");
  RVec pd = RVec::Zero(d);
  const ParticleOperator pj = discrete_window_projection(d, w) + continuum_window_projection(hp, w);
  for (int i = 0; i < d; ++i) pd[i] = pj(i, i).real();

  ProjectionKit kit;
  kit.delta_width = delta_width;
  const int n = s.dimension();
  for (RVec* m : {&kit.pi, &kit.p0, &kit.p_omega, &kit.p, &kit.p_left, &kit.p_right, &kit.p_zero, &kit.e_delta})
    *m = RVec::Zero(n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const bool kernel_pair = modes[i].kind == ModeKind::discrete && modes[j].kind == ModeKind::discrete &&
                               std::abs(e[i] - e[j]) <= cluster_tol;
      for (int k = 0; k < s.fock_dim; ++k) {
        const int f = s.index(i, j, k);
        const bool vac = k == 0;
        kit.p0[f] = kernel_pair;
        kit.p_omega[f] = vac;
        kit.pi[f] = kernel_pair && vac;
        const bool li = pd[i] != 0, rj = pd[j] != 0;
        kit.p[f] = li && rj;
        kit.p_left[f] = li && !rj;
        kit.p_right[f] = !li && rj;
        kit.p_zero[f] = !li && !rj;
        kit.e_delta[f] = std::abs(l0_diag[f]) <= delta_width / 2;
      }
    }
  return kit;
}

namespace {
// [L, Q] for a diagonal mask: entries L_ab (q_b - q_a).
double commutator_with_mask(const SpMat& l, const RVec& q) {
  double s = 0;
  for (int k = 0; k < l.outerSize(); ++k)
    for (SpMat::InnerIterator it(l, k); it; ++it) {
      const double diff = q[it.col()] - q[it.row()];
      if (diff != 0.0) s += std::norm(it.value());
    }
  return std::sqrt(s);
}
}  // namespace

BlockReductionReport block_reduction_check(const SpMat& l, const SpMat& l0, const ProjectionKit& kit, double tol) {
  BlockReductionReport r;
  for (const RVec* q : {&kit.p, &kit.p_left, &kit.p_right, &kit.p_zero})
    r.max_commutator = std::max(r.max_commutator, commutator_with_mask(l, *q));
  SpMat diff = (l - l0) * diagonal(kit.p_zero);
  r.p_zero_defect = diff.norm();
  r.pass = r.max_commutator <= tol && r.p_zero_defect <= tol;
  return r;
}

KernelReport kernel_report(const SpMat& l, const ProjectionKit& kit, double zero_tol, const IndexList& block) {
  KernelReport rep;
  if (block.empty()) {
    rep.block.resize(l.rows());
    for (int i = 0; i < l.rows(); ++i) rep.block[i] = i;
  } else {
    rep.block = block;
  }
  const CMat a = dense_block(l, rep.block);
  const HermitianEigen eig = eigh(a);
  rep.eigenvalues = eig.values;
  rep.min_abs_eigenvalue = eig.values.size() ? eig.values.cwiseAbs().minCoeff() : 0.0;
  for (Eigen::Index c = 0; c < eig.values.size(); ++c) {
    if (std::abs(eig.values[c]) > zero_tol) continue;
    KernelCandidate k;
    k.eigenvalue = eig.values[c];
    k.eigenvector = CVec::Zero(l.rows());
    double pi = 0, vc = 0, ex = 0;
    for (std::size_t r = 0; r < rep.block.size(); ++r) {
      const int f = rep.block[r];
      const cplx v = eig.vectors(r, c);
      k.eigenvector[f] = v;
      const double n2 = std::norm(v);
      pi += kit.pi[f] * n2;
      vc += (1.0 - kit.p0[f]) * kit.p_omega[f] * n2;
      ex += (1.0 - kit.p_omega[f]) * n2;
    }
    k.overlap_pi = std::sqrt(pi);
    k.overlap_vacuum_complement = std::sqrt(vc);
    k.overlap_excited = std::sqrt(ex);
    rep.candidates.push_back(std::move(k));
  }
  return rep;
}

CVec evolve(const HermitianEigen& eig, const CVec& psi, double t) {
  CVec c = eig.vectors.adjoint() * psi;
  for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(cplx(0, t * eig.values[k]));
  return eig.vectors * c;
}

CVec evolve(const CMat& l, const CVec& psi, double t) {
  if (t == 0.0) return psi;
  return evolve(eigh(l), psi, t);
}

}  // namespace llab
