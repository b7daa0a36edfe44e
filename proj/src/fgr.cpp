#include "llab/fgr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "llab/errors.hpp"
#include "llab/linalg.hpp"

namespace llab {

RVec p_weight_diagonal(const ParticleOperator& hp, const std::vector<ModeLabel>& modes, PWeight kind,
                       const WindowSpec* window) {
  RVec w = RVec::Zero(hp.rows());
  if (kind == PWeight::p_c) {
    for (const auto& m : modes) w[m.index] = m.kind == ModeKind::pseudo_continuum ? 1.0 : 0.0;
    return w;
  }
  if (!window) throw ValidationError("mu^2 weighting requires a window");
  const ParticleOperator mu = mollified_indicator(hp, *window);
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::norm(mu(i, i));
  return w;
}

ParticleOperator coupling_at(const FgrModel& m, double w) {
  ParticleOperator f = ParticleOperator::Zero(m.hp.rows(), m.hp.cols());
  for (std::size_t a = 0; a < m.couplings.size(); ++a) f += m.form_factors[a](w) * m.couplings[a];
  return f;
}

ParticleOperator transition_kernel(double w, double e, const ParticleOperator& f_matrix, const ParticleOperator& hp,
                                   const RVec& p_weight, double eps, double angular_factor) {
  if (!(eps > 0)) throw DomainError("transition_kernel requires eps > 0");
  const RVec h = energies(hp);
  RVec lor(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double x = h[i] - e - w;
    lor[i] = p_weight[i] * eps / (x * x + eps * eps);
  }
  return hermitize(ParticleOperator(angular_factor * f_matrix * lor.cast<cplx>().asDiagonal() * f_matrix.adjoint()));
}

double default_omega_max(double e, double beta) { return -e + 40.0 / beta; }

namespace {

CMat restricted_kernel(double w, double e, const IndexList& rows, const FgrModel& m, const FgrParams& p) {
  const ParticleOperator f = coupling_at(m, w);
  const RVec h = energies(m.hp);
  CMat x(rows.size(), h.size());
  for (std::size_t r = 0; r < rows.size(); ++r) x.row(r) = f.row(rows[r]);
  RVec lor(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double d = h[i] - e - w;
    lor[i] = m.p_weight[i] * p.eps / (d * d + p.eps * p.eps);
  }
  return p.angular_factor * x * lor.cast<cplx>().asDiagonal() * x.adjoint();
}

std::vector<double> breakpoints(double e, double lo, double hi, const FgrModel& m) {
  std::vector<double> b{lo, hi};
  const RVec h = energies(m.hp);
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double x = h[i] - e;
    if (m.p_weight[i] != 0.0 && x > lo && x < hi) b.push_back(x);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

CMat composite_gl(double e, const IndexList& rows, const FgrModel& m, const FgrParams& p, double beta, double lo,
                  double hi, double panel_width, gsl_integration_glfixed_table* table) {
  CMat acc = CMat::Zero(rows.size(), rows.size());
  const auto b = breakpoints(e, lo, hi, m);
  for (std::size_t s = 0; s + 1 < b.size(); ++s) {
    const double a0 = b[s], a1 = b[s + 1];
    const int panels = std::max(1, static_cast<int>(std::ceil((a1 - a0) / panel_width)));
    const double h = (a1 - a0) / panels;
    for (int k = 0; k < panels; ++k) {
      const double x0 = a0 + k * h;
      for (int q = 0; q < p.gl_order; ++q) {
        double w = 0, wt = 0;
        gsl_integration_glfixed_point(x0, x0 + h, q, &w, &wt, table);
        acc += (wt * w * w * planck_weight(w, beta)) * restricted_kernel(w, e, rows, m, p);
      }
    }
  }
  return acc;
}

}  // namespace

CMat fgr_matrix(double e, const IndexList& eigenspace, const FgrModel& m, const FgrParams& params, double beta) {
  if (!(params.eps > 0)) throw DomainError("fgr_matrix requires eps > 0");
  if (!(e < 0)) throw DomainError("fgr_matrix requires a negative (bound) eigenvalue");
  const double lo = -e;
  const double hi = params.omega_max > 0 ? params.omega_max : default_omega_max(e, beta);
  if (!(hi > lo)) throw ValidationError("omega_max must exceed -E");
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(params.gl_order);
  const CMat coarse = composite_gl(e, eigenspace, m, params, beta, lo, hi, params.eps, table);
  const CMat fine = composite_gl(e, eigenspace, m, params, beta, lo, hi, params.eps / 2, table);
  gsl_integration_glfixed_table_free(table);
  const double nf = fine.norm();
  const double change = (fine - coarse).norm();
  if (nf > 0 && change > params.convergence_tol * nf) {
    std::ostringstream os;
    os << "FGR quadrature not converged at E=" << e << ": relative change " << change / nf << " on node doubling";
    throw AccuracyError(os.str(), coarse.norm(), nf);
  }
  return hermitize(fine);
}

double gamma_of(const CMat& fgr) {
  if (fgr.size() == 0) throw ValidationError("gamma_of: empty FGR matrix");
  return eigvalsh(hermitize(fgr)).minCoeff();
}

namespace {
struct OracleCtx {
  const FormFactor* fa;
  const FormFactor* fb;
  double beta, center, eps;
  bool imag;
};

double oracle_integrand(double w, void* raw) {
  const auto* c = static_cast<const OracleCtx*>(raw);
  // Doubled-line values at u = -w: tau g(u) = -sqrt(w n(w)) sqrt(w) conj g(w).
  const double amp = std::sqrt(w * planck_weight(w, c->beta)) * std::sqrt(w);
  const cplx ta = -amp * std::conj((*c->fa)(w));
  const cplx tb = -amp * std::conj((*c->fb)(w));
  const double d = c->center - w;
  const cplx v = std::conj(ta) * tb * (c->eps / (d * d + c->eps * c->eps));
  return c->imag ? v.imag() : v.real();
}
}  // namespace

CMat oracle_fgr_matrix(double e, const IndexList& eigenspace, const FgrModel& m, const FgrParams& params,
                       double beta) {
  const double lo = -e;
  const double hi = params.omega_max > 0 ? params.omega_max : default_omega_max(e, beta);
  const RVec h = energies(m.hp);
  const std::size_t na = m.couplings.size();
  gsl_set_error_handler_off();
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4000);
  CMat out = CMat::Zero(eigenspace.size(), eigenspace.size());
  for (Eigen::Index c = 0; c < h.size(); ++c) {
    if (m.p_weight[c] == 0.0) continue;
    const double center = h[c] - e;
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < na; ++b) {
        cplx integral = 0;
        for (int part = 0; part < 2; ++part) {
          OracleCtx ctx{&m.form_factors[a], &m.form_factors[b], beta, center, params.eps, part == 1};
          gsl_function fn{&oracle_integrand, &ctx};
          std::vector<double> pts{lo};
          if (center > lo && center < hi) pts.push_back(center);
          pts.push_back(hi);
          double val = 0, err = 0;
          gsl_integration_qagp(&fn, pts.data(), pts.size(), 0.0, 1e-10, 4000, ws, &val, &err);
          integral += part == 0 ? cplx(val, 0) : cplx(0, val);
        }
        for (std::size_t r = 0; r < eigenspace.size(); ++r)
          for (std::size_t s = 0; s < eigenspace.size(); ++s)
            out(r, s) += params.angular_factor * m.p_weight[c] * m.couplings[a](eigenspace[r], c) *
                         std::conj(m.couplings[b](eigenspace[s], c)) * integral;
      }
  }
  gsl_integration_workspace_free(ws);
  return hermitize(out);
}

RateReport rate_report(const FgrModel& m, const std::vector<ModeLabel>& modes, const WindowSpec& window,
                       const FgrParams& params, double beta, double lambda, bool use_oracle) {
  if (window.coupled_discrete.empty()) throw ValidationError("rate report needs a nonempty set of coupled modes");
  std::vector<double> levels;
  for (int i : window.coupled_discrete) levels.push_back(modes[i].energy);
  std::sort(levels.begin(), levels.end());
  RateReport rep;
  rep.gamma = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (k > 0 && levels[k] - levels[k - 1] <= 1e-9) continue;
    IndexList space;
    for (int i : window.coupled_discrete)
      if (std::abs(modes[i].energy - levels[k]) <= 1e-9) space.push_back(i);
    RateEntry entry;
    entry.energy = levels[k];
    entry.rank = static_cast<int>(space.size());
    entry.matrix = use_oracle ? oracle_fgr_matrix(levels[k], space, m, params, beta)
                              : fgr_matrix(levels[k], space, m, params, beta);
    entry.gamma = gamma_of(entry.matrix);
    entry.ionization_time = ionization_time_estimate(entry.gamma, lambda);
    rep.gamma = std::min(rep.gamma, entry.gamma);
    rep.entries.push_back(std::move(entry));
  }
  return rep;
}

double gamma_overall(const RateReport& r) {
  if (r.entries.empty()) throw ValidationError("no coupled eigenvalues");
  double g = std::numeric_limits<double>::infinity();
  for (const auto& e : r.entries) g = std::min(g, e.gamma);
  return g;
}

double ionization_time_estimate(double gamma_e, double lambda) {
  if (gamma_e <= 0 || lambda == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (lambda * lambda * gamma_e);
}

TemperatureSweep temperature_sweep(double e, const std::vector<double>& betas, const std::vector<double>& gammas) {
  if (betas.size() != gammas.size()) throw ValidationError("temperature_sweep: size mismatch");
  TemperatureSweep t;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (gammas[i] > 0) {
      t.betas.push_back(betas[i]);
      t.gammas.push_back(gammas[i]);
    } else {
      t.excluded_betas.push_back(betas[i]);
    }
  }
  if (t.betas.size() < 4) throw ValidationError("temperature_sweep needs at least 4 positive rates");
  const double n = static_cast<double>(t.betas.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.betas.size(); ++i) {
    const double x = t.betas[i], y = std::log(t.gammas[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  t.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  t.intercept = (sy - t.slope * sx) / n;
  t.relative_slope_error = std::abs(t.slope - e) / std::abs(e);
  for (std::size_t i = 0; i < t.betas.size(); ++i) t.k = std::max(t.k, t.gammas[i] * std::exp(-t.betas[i] * e));
  t.two_sided_ok = true;
  for (std::size_t i = 0; i < t.betas.size(); ++i) {
    const double upper = t.k * std::exp(t.betas[i] * e);
    const bool ok = upper / (1.0 + t.betas[i]) <= t.gammas[i] && t.gammas[i] <= upper * (1.0 + 1e-12);
    t.lower_bound_ok.push_back(ok);
    t.two_sided_ok = t.two_sided_ok && ok;
  }
  return t;
}

BridgeRecord oracle_fgr_bound(const SpMat& interaction, const ProjectionKit& kit, const RVec& l0_diag, double gamma,
                              double eps, double tol) {
  BridgeRecord b;
  b.tol = tol;
  // Pairs of uncoupled levels sit in the P^0 block and contribute exact zeros, so restrict to Ran(Pi P).
  const IndexList pi = support(RVec(kit.pi.cwiseProduct(kit.p)));
  IndexList all(interaction.rows());
  for (int i = 0; i < interaction.rows(); ++i) all[i] = i;
  const CMat x = dense_block(interaction, all, pi);
  RVec r2(l0_diag.size());
  for (Eigen::Index i = 0; i < r2.size(); ++i) r2[i] = (1.0 - kit.pi[i]) / (l0_diag[i] * l0_diag[i] + eps * eps);
  const CMat m = hermitize(CMat(x.adjoint() * r2.cast<cplx>().asDiagonal() * x));
  b.lambda_min = pi.empty() ? 0.0 : eigvalsh(m).minCoeff();
  b.gamma_over_eps = gamma / eps;
  b.ratio = b.gamma_over_eps > 0 ? b.lambda_min / b.gamma_over_eps : 0.0;
  b.pass = b.lambda_min >= b.gamma_over_eps * (1.0 - tol);
  return b;
}

double lorentzian_mass(const std::vector<double>& nodes, const std::vector<double>& weights, double center,
                       double eps) {
  double s = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double x = nodes[k] - center;
    s += weights[k] * eps / (x * x + eps * eps);
  }
  return s;
}

}  // namespace llab
