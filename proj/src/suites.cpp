#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "llab/commutator_lab.hpp"
#include "llab/errors.hpp"
#include "llab/fgr.hpp"
#include "llab/report_cli.hpp"

namespace llab {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double normal() { return dist_(gen_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen_); }
  CVec cvec(int n) {
    CVec v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(normal(), normal());
    return v;
  }
  CMat hermitian(int n) {
    CMat a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = cplx(normal(), normal());
    return hermitize(a);
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> dist_;
};

struct Collector {
  std::vector<SuiteResult> out;
  void add(const std::string& module, const std::string& name, double value, double tol, bool pass,
           const std::string& detail = "") {
    out.push_back({module, name, pass, value, tol, detail});
  }
  void le(const std::string& module, const std::string& name, double value, double tol,
          const std::string& detail = "") {
    add(module, name, value, tol, value <= tol, detail);
  }
};

double sparse_diff(const SpMat& a, const SpMat& b) { return max_abs(SpMat(a - b)); }

}  // namespace

std::vector<SuiteResult> run_invariant_suites(const Model& m, std::uint64_t seed) {
  Collector c;
  Rng rng(seed);
  const int d = m.space.d;

  // atom_model
  c.add("atom_model", "hamiltonian_exactly_hermitian", 0, 0, is_exactly_hermitian(m.hp));
  c.add("atom_model", "cp_invariance_of_hamiltonian", 0, 0, cp_conjugate(m.hp) == m.hp);
  {
    CMat sum = CMat::Zero(d, d);
    bool proj_ok = true;
    for (double e : clustered_eigenvalues(m.hp)) {
      const CMat p = spectral_projection(m.hp, e);
      proj_ok = proj_ok && (p * p == p) && is_exactly_hermitian(p);
      if (e < 0) sum += p;
    }
    const CMat pc = mask_matrix(p_weight_diagonal(m.hp, m.modes, PWeight::p_c, nullptr));
    c.add("atom_model", "projections_idempotent", 0, 0, proj_ok);
    c.add("atom_model", "resolution_of_identity", (sum + pc - CMat::Identity(d, d)).cwiseAbs().maxCoeff(), 0,
          sum + pc == CMat::Identity(d, d));
  }
  {
    bool herm = true;
    double outside = 0, idem = 0;
    const CMat q = discrete_window_projection(d, m.cfg.window) + mollified_indicator(m.hp, m.cfg.window);
    for (std::size_t a = 0; a < m.couplings.size(); ++a) {
      herm = herm && is_exactly_hermitian(m.couplings[a]);
      const CMat twice = regularize_coupling(m.couplings[a], m.hp, m.cfg.window, m.modes);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const double qi = q(i, i).real(), qj = q(j, j).real();
          if (qi == 0 || qj == 0) outside = std::max(outside, std::abs(m.couplings[a](i, j)));
          if ((qi == 0 || qi == 1) && (qj == 0 || qj == 1))
            idem = std::max(idem, std::abs(twice(i, j) - m.couplings[a](i, j)));
        }
    }
    c.add("atom_model", "regularized_couplings_hermitian", 0, 0, herm);
    c.le("atom_model", "regularized_couplings_vanish_outside_window", outside, 0);
    c.le("atom_model", "regularize_idempotent_on_coupled_block", idem, 1e-14);
  }

  // thermal_field
  {
    const auto& g = m.grid;
    const FockSpace& F = m.fock;
    const CVec f = rng.cvec(g.size()), h = rng.cvec(g.size());
    const SpMat a = annihilator(f, g, F), ad = creator(h, g, F);
    const CMat comm = CMat(a * ad - ad * a);
    const cplx ip = doubled_inner(f, h, g);
    double dev = 0;
    for (int i = 0; i < F.dimension(); ++i) {
      if (F.total_number(i) > F.n_max() - 1) continue;
      for (int j = 0; j < F.dimension(); ++j) {
        if (F.total_number(j) > F.n_max() - 1) continue;
        dev = std::max(dev, std::abs(comm(i, j) - (i == j ? ip : cplx(0))));
      }
    }
    c.le("thermal_field", "ccr_on_truncated_block", dev, 1e-12);
    const SpMat phi = field_op(f, g, F);
    c.add("thermal_field", "field_operator_hermitian", 0, 0, is_exactly_hermitian(CMat(phi)));
    c.le("thermal_field", "annihilator_kills_vacuum", CMat(a).col(0).cwiseAbs().maxCoeff(), 0);
    c.add("thermal_field", "fock_dimension_formula", F.dimension(), 0,
          F.dimension() == FockSpace::expected_dimension(F.mode_count(), F.n_max()));
    const CMat t = translation_generator(g);
    const SpMat at = second_quantize(t, F);
    const SpMat n = number_operator(F);
    c.add("thermal_field", "translation_generator_hermitian", 0, 0, is_exactly_hermitian(t));
    c.le("thermal_field", "translation_commutes_with_number", sparse_diff(at * n, n * at), 0);
  }
  {
    const DoubledGrid g = make_doubled_grid(8.0, 800);
    const RadialGrid r = g.positive_half();
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
      const FormFactor f = sampled_form_factor(r, rng.cvec(static_cast<int>(r.nodes.size())), 3, 4);
      const FormFactor h = sampled_form_factor(r, rng.cvec(static_cast<int>(r.nodes.size())), 3, 4);
      const double beta = rng.uniform(0.2, 5.0);
      const double lhs = doubled_inner(bogoliubov_map(f, beta, g), bogoliubov_map(h, beta, g), g).imag();
      const double rhs = radial_inner(f.samples, h.samples, r).imag();
      const double scale = std::sqrt(radial_inner(f.samples, f.samples, r).real() *
                                     radial_inner(h.samples, h.samples, r).real());
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    c.le("thermal_field", "bogoliubov_ccr_preservation", worst, 1e-6, "50 random pairs, 400 radial nodes");
    const FormFactor f = sampled_form_factor(r, rng.cvec(static_cast<int>(r.nodes.size())), 3, 4);
    bool mono = true;
    CVec prev = bogoliubov_map(f, 0.1, g);
    for (double beta : {0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0}) {
      const CVec cur = bogoliubov_map(f, beta, g);
      for (int j = 0; j < g.size() / 2; ++j) mono = mono && std::abs(cur[j]) <= std::abs(prev[j]);
      prev = cur;
    }
    c.add("thermal_field", "negative_frequency_monotone_in_beta", 0, 0, mono);
  }

  // liouvillian
  {
    const RVec e = energies(m.hp);
    double dev = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < m.fock.dimension(); ++k) {
          const auto occ = m.fock.occupation_vector(k);
          double s = e[i] - e[j];
          for (int q = 0; q < m.fock.mode_count(); ++q) s += occ[q] * m.grid.nodes[q];
          dev = std::max(dev, std::abs(s - m.l0_diag[m.space.index(i, j, k)]));
        }
    c.le("liouvillian", "l0_spectrum_matches_enumeration", dev, 1e-12);
    const IndexList pi = support(m.kit.pi);
    const double pip = pi.empty() ? 0.0 : dense_block(m.interaction.matrix, pi).cwiseAbs().maxCoeff();
    c.le("liouvillian", "pi_I_pi_vanishes", pip, 0);
    c.le("liouvillian", "interaction_hermitian", hermitian_defect(m.interaction.matrix), 1e-13);
    const RVec total = m.kit.p + m.kit.p_left + m.kit.p_right + m.kit.p_zero;
    c.add("liouvillian", "partition_of_unity", 0, 0, total == RVec::Ones(total.size()));
    c.add("liouvillian", "pi_is_p0_times_vacuum", 0, 0, m.kit.pi == m.kit.p0.cwiseProduct(m.kit.p_omega));
    double worst = 0;
    for (double lam : m.cfg.lambdas) {
      const auto b = block_reduction_check(m.L(lam), m.l0.matrix, m.kit);
      worst = std::max({worst, b.max_commutator, b.p_zero_defect});
    }
    c.le("liouvillian", "block_reduction", worst, 1e-12);
    int zeros = 0;
    for (Eigen::Index i = 0; i < m.l0_diag.size(); ++i) zeros += std::abs(m.l0_diag[i]) <= m.cfg.zero_tol;
    const int i1 = degenerate_pair_count(m.hp);
    // With n_max >= 2 pairs of opposite photons can add further exact zeros.
    c.add("liouvillian", "kernel_dimension_at_zero_coupling", zeros, i1,
          m.fock.n_max() >= 2 ? zeros >= i1 : zeros == i1, "i1 count " + std::to_string(i1));
    const CMat h = rng.hermitian(40);
    const CVec psi = rng.cvec(40);
    const CVec out = evolve(h, psi, 1.7);
    c.le("liouvillian", "evolve_preserves_norm", std::abs(out.norm() - psi.norm()) / psi.norm(), 1e-12);
  }

  // fgr
  {
    const FgrModel fm = m.fgr_model();
    const double eps = m.cfg.epsilons.front();
    double psd = 0;
    for (int k = 0; k < 20; ++k) {
      const double w = rng.uniform(0.05, 5.0);
      const double e = rng.uniform(-3.0, -0.1);
      psd = std::min(psd, eigvalsh(transition_kernel(w, e, coupling_at(fm, w), m.hp, fm.p_weight, eps)).minCoeff());
    }
    c.add("fgr", "transition_kernel_psd", psd, -1e-12, psd >= -1e-12);
    const FgrParams fp = m.fgr_params(eps);
    const RateReport gl = rate_report(fm, m.modes, m.cfg.window, fp, m.beta, m.cfg.lambdas.front());
    const RateReport orc = rate_report(fm, m.modes, m.cfg.window, fp, m.beta, m.cfg.lambdas.front(), true);
    double agree = 0;
    for (std::size_t k = 0; k < gl.entries.size(); ++k) {
      const double nrm = std::max(orc.entries[k].matrix.norm(), 1e-300);
      agree = std::max(agree, (gl.entries[k].matrix - orc.entries[k].matrix).norm() / nrm);
    }
    c.le("fgr", "gauss_legendre_matches_adaptive_oracle", agree, 0.01);
    FgrModel scaled = fm;
    for (auto& g : scaled.couplings) g *= 3.0;
    const auto& e0 = gl.entries.front();
    IndexList space;
    for (int i : m.cfg.window.coupled_discrete)
      if (std::abs(m.modes[i].energy - e0.energy) <= 1e-9) space.push_back(i);
    const CMat s9 = fgr_matrix(e0.energy, space, scaled, fp, m.beta);
    c.le("fgr", "coupling_scaling_quadratic", (s9 - 9.0 * e0.matrix).norm() / std::max(s9.norm(), 1e-300), 1e-12);
    bool rotated_ok = true;
    double rot = 0;
    for (const auto& ent : gl.entries) {
      if (ent.rank < 2) continue;
      IndexList sp;
      for (int i : m.cfg.window.coupled_discrete)
        if (std::abs(m.modes[i].energy - ent.energy) <= 1e-9) sp.push_back(i);
      const CMat u = Eigen::HouseholderQR<CMat>(rng.hermitian(ent.rank) + CMat::Identity(ent.rank, ent.rank) * 0.1)
                         .householderQ();
      CMat full = CMat::Identity(d, d);
      for (int a = 0; a < ent.rank; ++a)
        for (int b = 0; b < ent.rank; ++b) full(sp[a], sp[b]) = u(a, b);
      FgrModel r = fm;
      for (auto& g : r.couplings) g = full * g * full.adjoint();
      rot = std::max(rot, std::abs(gamma_of(fgr_matrix(ent.energy, sp, r, fp, m.beta)) - ent.gamma) /
                              std::max(std::abs(ent.gamma), 1e-300));
    }
    rotated_ok = rot <= 1e-10;
    c.add("fgr", "gamma_rotation_invariant", rot, 1e-10, rotated_ok);
    std::vector<double> nodes, weights;
    const double width = 100 * eps;
    for (int k = 0; k <= 20000; ++k) {
      nodes.push_back(-width + k * (2 * width / 20000));
      weights.push_back((k == 0 || k == 20000) ? width / 20000 : 2 * width / 20000);
    }
    const double mass = lorentzian_mass(nodes, weights, 0.0, eps);
    c.le("fgr", "lorentzian_normalization", std::abs(mass - M_PI) / M_PI, 0.01);
    const BridgeRecord b = oracle_fgr_bound(m.interaction.matrix, m.kit, m.l0_diag, orc.gamma, eps, m.cfg.bridge_tol);
    c.add("fgr", "level_shift_bridge", b.ratio, 1 - m.cfg.bridge_tol, b.pass);
  }

  // commutator_lab
  {
    const double lam = m.cfg.lambdas.front();
    const double eps = m.cfg.epsilons.front();
    const SpMat l = m.L(lam);
    const SpMat af = build_Af(m.grid, m.fock, d);
    const ConjugateKit ck = conjugate_kit(af, m.interaction.matrix, m.kit, m.l0_diag, m.cfg.theta, eps, lam);
    c.le("commutator_lab", "r2_residual", ck.r2_residual, 1e-10);
    c.le("commutator_lab", "a0_identity", a0_identity_defect(l, ck, m.interaction.matrix, m.kit, lam), 1e-10);
    const SpMat c1 = commutator(l, af);
    const Certificates cert = assemble_certificates(l, c1, ck, m.kit, m.hp, m.cfg.window, m.fock.dimension(), lam);
    c.le("commutator_lab", "p_m1_p_vanishes", cert.pm1p_norm, 1e-12);
    bool d_ok = true;
    try {
      build_D(m.data, m.grid, m.fock, lam, l);
    } catch (const AssemblyError&) {
      d_ok = false;
    }
    c.add("commutator_lab", "d_cross_check", 0, 1e-10, d_ok);
    const C1Result r = build_C1(l, m.l0.matrix, af, m.data, m.grid, m.fock, lam);
    c.le("commutator_lab", "c1_interaction_parts_agree", r.lambda_part_deviation, 1e-10);
    const IndexList block = support(m.kit.p);
    if (static_cast<int>(block.size()) <= m.cfg.max_dense_dim) {
      const HermitianEigen eig = eigh(dense_block(l, block));
      const auto rep = eigen_diagnostics(eig, block, m.l0_diag, m.kit, m.number_diag, {c1}, m.cfg.zero_tol);
      const double a0n = spectral_norm(ck.a_0);
      const auto rep0 = eigen_diagnostics(eig, block, m.l0_diag, m.kit, m.number_diag,
                                          {commutator(l, ck.a_0)}, m.cfg.zero_tol);
      const double gate = std::max(rep.max_virial / spectral_norm(af), rep0.max_virial / std::max(a0n, 1e-300));
      c.le("commutator_lab", "virial_gate", gate, 1e-9, "P block eigenvectors");
    } else {
      c.add("commutator_lab", "virial_gate", 0, 1e-9, true, "skipped: P block exceeds max_dense_dim");
    }
    double fes = 0;
    for (int t = 0; t < 100; ++t) {
      const int n = rng.integer(8, 32);
      const int rank = rng.integer(1, 4);
      const CMat mm = rng.hermitian(n);
      std::vector<int> perm(n);
      for (int i = 0; i < n; ++i) perm[i] = i;
      for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.integer(0, i)]);
      IndexList pi(perm.begin(), perm.begin() + rank);
      std::sort(pi.begin(), pi.end());
      const RVec ev = eigvalsh(mm);
      const double z = ev[rng.integer(0, n - 1)];
      try {
        const RVec fe = eigvalsh(hermitize(feshbach_map(mm, pi, z)));
        fes = std::max(fes, (fe.array() - z).abs().minCoeff());
      } catch (const ResolventError&) {
        // z shared with the complementary block; not a counterexample.
      }
    }
    c.le("commutator_lab", "feshbach_isospectrality", fes, 1e-9, "100 random Hermitian matrices");
  }
  return c.out;
}

}  // namespace llab
