#include "llab/commutator_lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "llab/errors.hpp"

namespace llab {

namespace {
SpMat identity(int n) {
  SpMat i(n, n);
  i.setIdentity();
  return i;
}
constexpr cplx kI(0.0, 1.0);
}  // namespace

SpMat commutator(const SpMat& l, const SpMat& a) {
  SpMat la = l * a;
  SpMat al = a * l;
  SpMat c = kI * (la - al);
  c.prune(cplx(0.0));
  return c;
}

double spectral_norm(const SpMat& a, int iterations) {
  if (a.rows() == 0) return 0.0;
  CVec v(a.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
  v.normalize();
  double est = 0.0;
  for (int k = 0; k < iterations; ++k) {
    CVec w = a * v;
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    est = n;
    v = w / n;
  }
  return est;
}

SpMat lift_field(const SpMat& x, int d) { return kron3(identity(d), identity(d), x); }

SpMat build_Af(const DoubledGrid& grid, const FockSpace& fock, int d) {
  return lift_field(second_quantize(translation_generator(grid), fock), d);
}

SpMat build_D(const InteractionData& data, const DoubledGrid& grid, const FockSpace& fock, double lambda,
              const SpMat& l) {
  const int d = data.couplings.empty() ? static_cast<int>(std::lround(std::sqrt(l.rows() / fock.dimension())))
                                       : static_cast<int>(data.couplings.front().rows());
  SpMat dmat(l.rows(), l.cols());
  if (lambda != 0.0 && !data.couplings.empty()) {
    const double s = 1.0 / std::sqrt(2.0);
    dmat = lambda * assemble_linear(data, d, [&](const CVec& f) {
             SpMat a = annihilator(f, grid, fock);
             SpMat ad = a.adjoint();
             return SpMat(kI * s * (a - ad));
           });
  }
  const SpMat n = lift_field(number_operator(fock), d);
  const SpMat direct = commutator(l, n);
  const double defect = max_abs(SpMat(dmat - direct));
  if (defect > 1e-10) {
    std::ostringstream os;
    os << "D cross-check failed: max deviation " << defect;
    throw AssemblyError(os.str());
  }
  return dmat;
}

C1Result build_C1(const SpMat& l, const SpMat& l0, const SpMat& af, const InteractionData& data,
                  const DoubledGrid& grid, const FockSpace& fock, double lambda) {
  C1Result r;
  const int d = static_cast<int>(std::lround(std::sqrt(l.rows() / fock.dimension())));
  r.direct = commutator(l, af);
  const SpMat n = lift_field(number_operator(fock), d);
  SpMat i1(l.rows(), l.cols());
  if (!data.couplings.empty()) {
    const CMat s = central_difference(grid);
    i1 = assemble_linear(data, d, [&](const CVec& f) { return field_op(CVec(s * f), grid, fock); });
  }
  r.analytic = n + lambda * i1;
  r.max_deviation = max_abs(SpMat(r.direct - r.analytic));
  const SpMat lambda_part = commutator(SpMat(l - l0), af);
  r.lambda_part_deviation = max_abs(SpMat(lambda_part - lambda * i1));

  // Gaussian one-photon probe on the first atom pair.
  CVec g(grid.size());
  const double width = grid.nodes.cwiseAbs().maxCoeff() / 4.0;
  for (int j = 0; j < grid.size(); ++j) g[j] = std::exp(-grid.nodes[j] * grid.nodes[j] / (2 * width * width));
  CVec psi = CVec::Zero(l.rows());
  const SpMat create = creator(g, grid, fock);
  for (SpMat::InnerIterator it(create, 0); it; ++it) psi[it.row()] = it.value();
  psi.normalize();
  r.smooth_deviation = (SpMat(r.direct - r.analytic) * psi).norm();
  return r;
}

SpMat build_A0(const SpMat& interaction, const ProjectionKit& kit, const RVec& r2, double theta, double lambda) {
  const RVec pibar = kit.complement(kit.pi);
  SpMat x = diagonal(kit.pi) * interaction * diagonal(RVec(r2.cwiseProduct(pibar)));
  SpMat xa = x.adjoint();
  SpMat a0 = kI * theta * lambda * (x - xa);
  a0.prune(cplx(0.0));
  return a0;
}

ConjugateKit conjugate_kit(const SpMat& af, const SpMat& interaction, const ProjectionKit& kit, const RVec& l0_diag,
                           double theta, double eps, double lambda) {
  ConjugateKit ck;
  ck.a_f = af;
  ck.theta = theta;
  ck.eps = eps;
  ck.r2.resize(l0_diag.size());
  double res = 0;
  for (Eigen::Index i = 0; i < l0_diag.size(); ++i) {
    const double q = l0_diag[i] * l0_diag[i] + eps * eps;
    ck.r2[i] = 1.0 / q;
    res = std::max(res, std::abs(q * ck.r2[i] - 1.0));
  }
  ck.r2_residual = res;
  ck.a_0 = build_A0(interaction, kit, ck.r2, theta, lambda);
  return ck;
}

double a0_identity_defect(const SpMat& l, const ConjugateKit& ck, const SpMat& interaction, const ProjectionKit& kit,
                          double lambda) {
  const IndexList pi = support(kit.pi);
  const SpMat c = commutator(l, ck.a_0);
  const CMat lhs = dense_block(c, pi);
  IndexList all(interaction.rows());
  for (int i = 0; i < interaction.rows(); ++i) all[i] = i;
  const CMat x = dense_block(interaction, all, pi);
  const RVec rbar = ck.r2.cwiseProduct(kit.complement(kit.pi));
  const CMat rhs = 2.0 * ck.theta * lambda * lambda * (x.adjoint() * rbar.cast<cplx>().asDiagonal() * x);
  return (lhs - rhs).norm();
}

CMat feshbach_map(const CMat& m, const IndexList& pi, cplx z, double resolvent_tol) {
  const int n = static_cast<int>(m.rows());
  std::vector<bool> in(n, false);
  for (int i : pi) in[i] = true;
  IndexList bar;
  for (int i = 0; i < n; ++i)
    if (!in[i]) bar.push_back(i);
  auto block = [&](const IndexList& r, const IndexList& c) {
    CMat b(r.size(), c.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) b(i, j) = m(r[i], c[j]);
    return b;
  };
  const CMat a = block(pi, pi);
  if (bar.empty()) return a;
  CMat dm = block(bar, bar);
  const CMat shifted = dm - z * CMat::Identity(bar.size(), bar.size());
  Eigen::JacobiSVD<CMat> svd(shifted);
  const double smin = svd.singularValues().minCoeff();
  if (smin <= resolvent_tol) {
    Eigen::ComplexEigenSolver<CMat> es(dm, false);
    double closest = 0, best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const double dist = std::abs(es.eigenvalues()[k] - z);
      if (dist < best) {
        best = dist;
        closest = es.eigenvalues()[k].real();
      }
    }
    std::ostringstream os;
    os << "m lies within " << smin << " of the complementary block spectrum (eigenvalue " << closest << ")";
    throw ResolventError(os.str(), closest);
  }
  const CMat b = block(pi, bar);
  const CMat c = block(bar, pi);
  return a - b * shifted.partialPivLu().solve(c);
}

Certificates assemble_certificates(const SpMat& l, const SpMat& c1, const ConjugateKit& ck, const ProjectionKit& kit,
                                   const ParticleOperator& hp, const WindowSpec& w, int fock_dim, double lambda) {
  Certificates cert;
  cert.commutator_a0 = commutator(l, ck.a_0);
  cert.b = c1 + cert.commutator_a0;

  const RVec e = energies(hp);
  const ParticleOperator pjc = continuum_window_projection(hp, w);
  const TriSpace s{static_cast<int>(e.size()), fock_dim};
  RVec diag0(s.dimension());
  for (int i = 0; i < s.d; ++i)
    for (int j = 0; j < s.d; ++j)
      for (int k = 0; k < fock_dim; ++k) {
        const double h = k == 0 ? pjc(i, i).real() * e[i] + pjc(j, j).real() * e[j] : 0.0;
        diag0[s.index(i, j, k)] = h + 0.9 * (k == 0 ? 0.0 : 1.0) - lambda * lambda / 10.0;
      }
  cert.m0 = cert.commutator_a0 + diagonal(diag0);

  const RVec p = kit.p;
  const RVec pbar = kit.complement(p);
  const SpMat dp = diagonal(p), dpb = diagonal(pbar);
  cert.m1 = dpb * cert.commutator_a0 * dp + dp * cert.commutator_a0 * dpb + dpb * cert.commutator_a0 * dpb -
            (lambda * lambda / 10.0) * dpb;
  cert.m1.prune(cplx(0.0));
  cert.pm1p_norm = SpMat(dp * cert.m1 * dp).norm();
  return cert;
}

std::vector<std::string> regime_warnings(const WindowSpec& w, double theta, double eps, double lambda) {
  std::vector<std::string> out;
  if (!(theta > 0 && theta < w.r / 32)) {
    std::ostringstream os;
    os << "theta=" << theta << " outside (0, r/32) with r=" << w.r;
    out.push_back(os.str());
  }
  if (!(eps > 0)) out.push_back("eps must be positive");
  if (lambda == 0.0) out.push_back("lambda = 0: certificate is vacuous");
  return out;
}

CertificateReport certify_gap(const SpMat& m0, const ProjectionKit& kit, double gamma, double lambda, double theta,
                              double eps, double tol) {
  CertificateReport r;
  r.name = "M0";
  r.inequality = "lambda_min(E_Delta P M_0 P E_Delta) >= (theta lambda^2 / eps) gamma (1 - tol)";
  r.lambda = lambda;
  r.theta = theta;
  r.eps = eps;
  r.delta_width = kit.delta_width;
  r.gamma = gamma;
  r.tol = tol;
  const IndexList s = support(RVec(kit.p.cwiseProduct(kit.e_delta)));
  r.block_dimension = static_cast<int>(s.size());
  r.lambda_min = s.empty() ? 0.0 : eigvalsh(hermitize(dense_block(m0, s))).minCoeff();
  r.bound = theta * lambda * lambda * gamma / eps;
  r.margin = r.lambda_min - (1.0 - tol) * r.bound;
  r.degenerate = r.bound == 0.0;
  r.pass = r.margin >= 0.0;
  return r;
}

EigendiagReport eigen_diagnostics(const HermitianEigen& eig, const IndexList& block, const RVec& l0_diag,
                                  const ProjectionKit& kit, const RVec& number_diag,
                                  const std::vector<SpMat>& commutators, double kernel_tol) {
  EigendiagReport rep;
  rep.min_distance_to_kernel = std::numeric_limits<double>::infinity();
  std::vector<CMat> cblocks;
  for (const auto& c : commutators) cblocks.push_back(dense_block(c, block));
  for (Eigen::Index c = 0; c < eig.values.size(); ++c) {
    EigendiagRow row;
    row.eigenvalue = eig.values[c];
    const auto v = eig.vectors.col(c);
    const double nrm2 = v.squaredNorm();
    double num = 0, vc = 0, vac = 0, ker = 0;
    for (std::size_t r = 0; r < block.size(); ++r) {
      const int f = block[r];
      const double a = std::norm(v[r]);
      num += number_diag[f] * a;
      vc += (1.0 - kit.p0[f]) * kit.p_omega[f] * a;
      vac += kit.p_omega[f] * a;
      if (std::abs(l0_diag[f]) <= kernel_tol) ker += a;
    }
    row.number_bound = std::sqrt(num / nrm2);
    row.vacuum_complement = std::sqrt(vc / nrm2);
    row.distance_to_ker_l0 = std::sqrt(std::max(0.0, 1.0 - ker / nrm2));
    for (const auto& cb : cblocks) {
      const double vir = std::abs(v.dot(cb * v)) / nrm2;
      row.virial.push_back(vir);
      rep.max_virial = std::max(rep.max_virial, vir);
    }
    if (vac / nrm2 >= 0.5) rep.max_number_bound = std::max(rep.max_number_bound, row.number_bound);
    rep.min_distance_to_kernel = std::min(rep.min_distance_to_kernel, row.distance_to_ker_l0);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

LinearFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  double sxy = 0, sxx = 0, mean = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    mean += y[i];
  }
  mean /= static_cast<double>(y.size());
  f.k = sxy / sxx;
  double ssr = 0, sst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ssr += (y[i] - f.k * x[i]) * (y[i] - f.k * x[i]);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  f.r2 = sst > 0 ? 1.0 - ssr / sst : 0.0;
  return f;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace llab
