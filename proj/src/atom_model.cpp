#include "llab/atom_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gsl/gsl_integration.h>

#include "llab/errors.hpp"
#include "llab/linalg.hpp"

namespace llab {

Continuum make_continuum(double e_min, double e_max, int n_points, ContinuumScheme scheme) {
  Continuum c;
  c.e_min = e_min;
  c.e_max = e_max;
  c.n_points = n_points;
  if (n_points <= 0) return c;
  if (scheme == ContinuumScheme::uniform) {
    if (n_points == 1) {
      c.nodes = {e_min};
      c.quadrature_weights = {e_max - e_min > 0 ? e_max - e_min : 1.0};
      return c;
    }
    const double h = (e_max - e_min) / (n_points - 1);
    for (int k = 0; k < n_points; ++k) {
      c.nodes.push_back(k + 1 == n_points ? e_max : e_min + k * h);
      c.quadrature_weights.push_back((k == 0 || k + 1 == n_points) ? h / 2 : h);
    }
    return c;
  }
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n_points);
  for (int k = 0; k < n_points; ++k) {
    double x = 0, w = 0;
    gsl_integration_glfixed_point(e_min, e_max, k, &x, &w, t);
    c.nodes.push_back(x);
    c.quadrature_weights.push_back(w);
  }
  gsl_integration_glfixed_table_free(t);
  std::vector<int> order(n_points);
  for (int k = 0; k < n_points; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return c.nodes[a] < c.nodes[b]; });
  Continuum s = c;
  for (int k = 0; k < n_points; ++k) {
    s.nodes[k] = c.nodes[order[k]];
    s.quadrature_weights[k] = c.quadrature_weights[order[k]];
  }
  return s;
}

int AtomSpec::discrete_dimension() const {
  int n = 0;
  for (const auto& l : discrete_levels) n += l.degeneracy;
  return n;
}

int AtomSpec::dimension() const { return discrete_dimension() + continuum.n_points; }

std::vector<ModeLabel> AtomSpec::modes() const {
  std::vector<ModeLabel> out;
  int idx = 0;
  for (const auto& l : discrete_levels)
    for (int k = 0; k < l.degeneracy; ++k) out.push_back({idx++, ModeKind::discrete, l.energy});
  for (double e : continuum.nodes) out.push_back({idx++, ModeKind::pseudo_continuum, e});
  return out;
}

IndexList AtomSpec::basis_of_level(int level) const {
  if (level < 0 || level >= static_cast<int>(discrete_levels.size()))
    throw ValidationError("discrete level index " + std::to_string(level) + " out of range");
  int start = 0;
  for (int k = 0; k < level; ++k) start += discrete_levels[k].degeneracy;
  IndexList out;
  for (int k = 0; k < discrete_levels[level].degeneracy; ++k) out.push_back(start + k);
  return out;
}

void validate(const AtomSpec& spec) {
  std::vector<std::string> issues;
  for (std::size_t k = 0; k < spec.discrete_levels.size(); ++k) {
    const auto& l = spec.discrete_levels[k];
    std::ostringstream os;
    os << "discrete level " << k << " (energy " << l.energy << ")";
    if (!(l.energy < 0)) issues.push_back(os.str() + " must have energy < 0");
    if (l.degeneracy < 1) issues.push_back(os.str() + " must have degeneracy >= 1");
    if (k > 0 && !(spec.discrete_levels[k - 1].energy < l.energy))
      issues.push_back(os.str() + " is not sorted strictly ascending");
  }
  const auto& c = spec.continuum;
  if (c.n_points < 0) issues.push_back("continuum n_points must be >= 0");
  if (c.n_points > 0) {
    if (!(c.e_min > 0)) issues.push_back("continuum e_min must be > 0");
    if (!(c.e_min < c.e_max)) issues.push_back("continuum requires e_min < e_max");
    if (static_cast<int>(c.nodes.size()) != c.n_points ||
        static_cast<int>(c.quadrature_weights.size()) != c.n_points)
      issues.push_back("continuum nodes/weights do not match n_points");
    for (std::size_t k = 0; k < c.nodes.size(); ++k) {
      if (!(c.nodes[k] > 0)) issues.push_back("pseudo-continuum level " + std::to_string(k) + " has energy <= 0");
      if (k > 0 && !(c.nodes[k - 1] < c.nodes[k]))
        issues.push_back("pseudo-continuum level " + std::to_string(k) + " is not sorted ascending");
    }
    for (double w : c.quadrature_weights)
      if (!(w > 0)) {
        issues.push_back("continuum quadrature weights must be > 0");
        break;
      }
  }
  if (!issues.empty()) throw ValidationError(issues);
}

void validate(const WindowSpec& w, const AtomSpec& spec, bool require_coupled) {
  std::vector<std::string> issues;
  const auto modes = spec.modes();
  for (int i : w.coupled_discrete) {
    if (i < 0 || i >= static_cast<int>(modes.size()))
      issues.push_back("J_d index " + std::to_string(i) + " out of range");
    else if (modes[i].kind != ModeKind::discrete)
      issues.push_back("J_d contains pseudo-continuum label " + std::to_string(i));
  }
  if (require_coupled && w.coupled_discrete.empty()) issues.push_back("J_d must be nonempty");
  if (!(w.r > 0)) issues.push_back("window r must be > 0");
  if (!(w.R > w.r)) issues.push_back("window requires R > r");
  if (spec.continuum.n_points > 0 && !(w.R < spec.continuum.e_max))
    issues.push_back("window R must lie below continuum e_max");
  if (!(w.smoothing_margin > 0)) issues.push_back("smoothing_margin must be > 0");
  if (!(w.smoothing_margin < w.r)) issues.push_back("smoothing_margin must be < r (bump would touch zero energy)");
  if (!issues.empty()) throw ValidationError(issues);
}

ParticleOperator build_hamiltonian(const AtomSpec& spec) {
  validate(spec);
  const auto modes = spec.modes();
  ParticleOperator h = ParticleOperator::Zero(modes.size(), modes.size());
  for (const auto& m : modes) h(m.index, m.index) = m.energy;
  return h;
}

RVec energies(const ParticleOperator& h) { return h.diagonal().real(); }

ParticleOperator spectral_projection(const ParticleOperator& h, double e, double cluster_tol) {
  RVec d = energies(h);
  ParticleOperator p = ParticleOperator::Zero(h.rows(), h.cols());
  bool any = false;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (std::abs(d[i] - e) <= cluster_tol) {
      p(i, i) = 1.0;
      any = true;
    }
  if (!any) {
    std::ostringstream os;
    os << "no eigenvalue within " << cluster_tol << " of " << e;
    throw EmptyProjectionError(os.str());
  }
  return p;
}

std::vector<double> clustered_eigenvalues(const ParticleOperator& h, double cluster_tol) {
  RVec d = energies(h);
  std::vector<double> v(d.data(), d.data() + d.size());
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > cluster_tol) out.push_back(x);
  return out;
}

double bump_profile(double e, double r, double R, double margin) {
  if (e <= 0) return 0.0;
  auto ramp = [](double s) {
    if (s <= 0) return 1.0;
    if (s >= 1) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
  };
  if (e < r) return ramp((r - e) / margin);
  if (e <= R) return 1.0;
  return ramp((e - R) / margin);
}

ParticleOperator mollified_indicator(const ParticleOperator& h, const WindowSpec& w) {
  if (!(w.smoothing_margin < w.r))
    throw ValidationError("smoothing_margin must be < r (bump would touch zero energy)");
  RVec d = energies(h);
  ParticleOperator mu = ParticleOperator::Zero(h.rows(), h.cols());
  for (Eigen::Index i = 0; i < d.size(); ++i) mu(i, i) = bump_profile(d[i], w.r, w.R, w.smoothing_margin);
  return mu;
}

ParticleOperator discrete_window_projection(int dim, const WindowSpec& w) {
  ParticleOperator p = ParticleOperator::Zero(dim, dim);
  for (int i : w.coupled_discrete) p(i, i) = 1.0;
  return p;
}

ParticleOperator continuum_window_projection(const ParticleOperator& h, const WindowSpec& w) {
  RVec d = energies(h);
  ParticleOperator p = ParticleOperator::Zero(h.rows(), h.cols());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d[i] > 0 && d[i] > w.r - w.smoothing_margin && d[i] < w.R + w.smoothing_margin) p(i, i) = 1.0;
  return p;
}

ParticleOperator regularize_coupling(const ParticleOperator& g, const ParticleOperator& h,
                                     const WindowSpec& w, const std::vector<ModeLabel>& modes) {
  for (int i : w.coupled_discrete)
    if (i < 0 || i >= static_cast<int>(modes.size()) || modes[i].kind != ModeKind::discrete)
      throw ValidationError("J_d contains pseudo-continuum or invalid label " + std::to_string(i));
  ParticleOperator q = discrete_window_projection(static_cast<int>(h.rows()), w) + mollified_indicator(h, w);
  return hermitize(ParticleOperator(q * g * q));
}

ParticleOperator cp_conjugate(const ParticleOperator& x) { return x.conjugate(); }

ParticleOperator dipole_like_coupling(const ParticleOperator& h, double scale, bool zero_diagonal) {
  RVec e = energies(h);
  const auto n = e.size();
  ParticleOperator g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      g(i, j) = (zero_diagonal && i == j) ? 0.0 : scale / (1.0 + std::abs(e[i] - e[j]));
  return g;
}

ParticleOperator decouple(const ParticleOperator& g, const IndexList& basis) {
  ParticleOperator out = g;
  for (int i : basis) {
    out.row(i).setZero();
    out.col(i).setZero();
  }
  return out;
}

}  // namespace llab
