#include "llab/thermal_field.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "llab/errors.hpp"

namespace llab {

double planck_weight(double w, double beta) {
  if (!(w > 0) || !(beta > 0)) throw DomainError("planck_weight requires w > 0 and beta > 0");
  const double x = beta * w;
  if (x > 30.0) {
    const double t = std::exp(-x);
    return t / (-std::expm1(-x));
  }
  return 1.0 / std::expm1(x);
}

RadialGrid DoubledGrid::positive_half() const {
  RadialGrid r;
  std::vector<double> n, w;
  for (int j = 0; j < size(); ++j)
    if (nodes[j] > 0) {
      n.push_back(nodes[j]);
      w.push_back(weights[j]);
    }
  r.nodes = Eigen::Map<RVec>(n.data(), n.size());
  r.weights = Eigen::Map<RVec>(w.data(), w.size());
  return r;
}

DoubledGrid make_doubled_grid(double u_max, int n_u) {
  if (!(u_max > 0)) throw ValidationError("field u_max must be > 0");
  if (n_u < 2 || n_u % 2 != 0) throw ValidationError("field n_u must be even and >= 2");
  DoubledGrid g;
  g.spacing = 2.0 * u_max / n_u;
  g.nodes.resize(n_u);
  g.weights = RVec::Constant(n_u, g.spacing);
  for (int j = 0; j < n_u / 2; ++j) {
    const double u = (j + 0.5) * g.spacing;
    g.nodes[n_u / 2 + j] = u;
    g.nodes[n_u / 2 - 1 - j] = -u;
  }
  return g;
}

void validate(const DoubledGrid& g) {
  std::vector<std::string> issues;
  const int n = g.size();
  if (g.weights.size() != n) issues.push_back("doubled grid weights/nodes size mismatch");
  for (int j = 0; j < n && issues.empty(); ++j) {
    if (g.nodes[j] == 0.0) issues.push_back("doubled grid contains u = 0");
    if (g.nodes[j] != -g.nodes[n - 1 - j] || g.weights[j] != g.weights[n - 1 - j])
      issues.push_back("doubled grid not symmetric under u -> -u");
    if (!(g.weights[j] > 0)) issues.push_back("doubled grid weights must be > 0");
  }
  if (!issues.empty()) throw ValidationError(issues);
}

cplx FormFactor::operator()(double w) const {
  if (analytic) return analytic->amplitude * std::pow(w, analytic->p) * std::exp(-w / analytic->lambda);
  const auto& x = grid.nodes;
  const int n = static_cast<int>(x.size());
  if (n == 0 || w < x[0] || w > x[n - 1]) return 0.0;
  auto it = std::upper_bound(x.data(), x.data() + n, w);
  int k = static_cast<int>(it - x.data());
  if (k >= n) return samples[n - 1];
  if (k == 0) return samples[0];
  const double t = (w - x[k - 1]) / (x[k] - x[k - 1]);
  return (1 - t) * samples[k - 1] + t * samples[k];
}

FormFactor power_exp_form_factor(const RadialGrid& grid, const PowerExp& t) {
  FormFactor f;
  f.grid = grid;
  f.analytic = t;
  f.ir_exponent = t.p;
  f.uv_exponent = std::numeric_limits<double>::infinity();
  f.samples.resize(grid.nodes.size());
  for (Eigen::Index i = 0; i < grid.nodes.size(); ++i) f.samples[i] = f(grid.nodes[i]);
  return f;
}

FormFactor sampled_form_factor(const RadialGrid& grid, CVec samples, double p, double q) {
  if (samples.size() != grid.nodes.size()) throw ValidationError("form factor samples do not match radial grid");
  FormFactor f;
  f.grid = grid;
  f.samples = std::move(samples);
  f.ir_exponent = p;
  f.uv_exponent = q;
  return f;
}

EnvelopeCheck check_envelopes(const FormFactor& f, double k1, double k2, double big_k1, double big_k2) {
  EnvelopeCheck c;
  for (Eigen::Index i = 0; i < f.grid.nodes.size(); ++i) {
    const double w = f.grid.nodes[i];
    const double a = std::abs(f.samples[i]);
    if (w < k1) c.ir_worst = std::max(c.ir_worst, a / (k2 * std::pow(w, f.ir_exponent)));
    if (w > big_k1 && std::isfinite(f.uv_exponent))
      c.uv_worst = std::max(c.uv_worst, a / (big_k2 * std::pow(w, -f.uv_exponent)));
  }
  c.ir_ok = c.ir_worst <= 1.0;
  c.uv_ok = c.uv_worst <= 1.0;
  return c;
}

namespace {
void require_matching(const FormFactor& f, const DoubledGrid& out) {
  RadialGrid pos = out.positive_half();
  bool ok = pos.nodes.size() == f.grid.nodes.size();
  for (Eigen::Index i = 0; ok && i < pos.nodes.size(); ++i)
    ok = std::abs(pos.nodes[i] - f.grid.nodes[i]) <= 1e-12 * std::max(1.0, std::abs(pos.nodes[i]));
  if (!ok) throw ValidationError("form-factor radial grid does not match the doubled grid's positive nodes");
}

// Positive-node sample index for doubled node j.
int radial_index(const DoubledGrid& g, int j) {
  const int half = g.size() / 2;
  return g.nodes[j] > 0 ? j - half : half - 1 - j;
}

// sqrt(|u|) * sqrt(|u| * weight) * g(|u|) with weight = 1 + n or n.
CVec doubled_values(const FormFactor& f, double beta, const DoubledGrid& out, bool kms) {
  require_matching(f, out);
  CVec v(out.size());
  for (int j = 0; j < out.size(); ++j) {
    const double u = out.nodes[j];
    const double a = std::abs(u);
    const double n = planck_weight(a, beta);
    const cplx s = f.samples[radial_index(out, j)];
    // e^{-beta u/2} exchanges the (1 + n) and n factors between u and -u.
    const bool upper = (u > 0) != kms;
    const double amp = std::sqrt(a * (upper ? 1.0 + n : n)) * std::sqrt(a);
    v[j] = u > 0 ? amp * s : -amp * std::conj(s);
  }
  return v;
}
}  // namespace

CVec bogoliubov_map(const FormFactor& f, double beta, const DoubledGrid& out) {
  return doubled_values(f, beta, out, false);
}

CVec kms_weighted_bogoliubov(const FormFactor& f, double beta, const DoubledGrid& out) {
  return doubled_values(f, beta, out, true);
}

CVec kms_weighted(const CVec& f, const DoubledGrid& grid, double beta) {
  CVec v(f.size());
  for (Eigen::Index j = 0; j < f.size(); ++j) v[j] = std::exp(-beta * grid.nodes[j] / 2) * f[j];
  return v;
}

cplx doubled_inner(const CVec& f, const CVec& g, const DoubledGrid& grid) {
  cplx s = 0;
  for (int j = 0; j < grid.size(); ++j) s += grid.weights[j] * std::conj(f[j]) * g[j];
  return s;
}

cplx radial_inner(const CVec& f, const CVec& g, const RadialGrid& grid) {
  cplx s = 0;
  for (Eigen::Index j = 0; j < grid.nodes.size(); ++j)
    s += grid.weights[j] * grid.nodes[j] * grid.nodes[j] * std::conj(f[j]) * g[j];
  return s;
}

FockSpace::FockSpace(int mode_count, int n_max) : m_(mode_count), n_max_(n_max) {
  if (mode_count < 1) throw ValidationError("Fock space needs at least one mode");
  if (n_max < 1) throw ValidationError("n_max must be >= 1");
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int start, int left) {
    if (left == 0) {
      states_.push_back(cur);
      return;
    }
    for (int j = start; j < m_; ++j) {
      cur.push_back(j);
      rec(j, left - 1);
      cur.pop_back();
    }
  };
  for (int k = 0; k <= n_max_; ++k) rec(0, k);
  for (int i = 0; i < dimension(); ++i) index_.emplace(states_[i], i);
}

int FockSpace::occupation(int k, int mode) const {
  const auto& s = states_[k];
  return static_cast<int>(std::count(s.begin(), s.end(), mode));
}

std::vector<int> FockSpace::occupation_vector(int k) const {
  std::vector<int> n(m_, 0);
  for (int j : states_[k]) ++n[j];
  return n;
}

int FockSpace::index_of(const std::vector<int>& multiset) const {
  auto it = index_.find(multiset);
  return it == index_.end() ? -1 : it->second;
}

long long FockSpace::expected_dimension(int mode_count, int n_max) {
  long long total = 0, c = 1;  // C(M+k-1, k)
  for (int k = 0; k <= n_max; ++k) {
    if (k > 0) c = c * (mode_count + k - 1) / k;
    total += c;
  }
  return total;
}

FieldOperator annihilator(const CVec& f, const DoubledGrid& grid, const FockSpace& fock) {
  if (f.size() != grid.size() || grid.size() != fock.mode_count())
    throw ValidationError("annihilator: grid/space mismatch");
  std::vector<Triplet> t;
  for (int col = 0; col < fock.dimension(); ++col) {
    const auto& s = fock.state(col);
    for (std::size_t p = 0; p < s.size(); ++p) {
      if (p > 0 && s[p] == s[p - 1]) continue;
      const int j = s[p];
      const int n = fock.occupation(col, j);
      std::vector<int> lowered = s;
      lowered.erase(lowered.begin() + p);
      const int row = fock.index_of(lowered);
      t.emplace_back(row, col, std::sqrt(grid.weights[j]) * std::conj(f[j]) * std::sqrt(double(n)));
    }
  }
  FieldOperator a(fock.dimension(), fock.dimension());
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

FieldOperator creator(const CVec& f, const DoubledGrid& grid, const FockSpace& fock) {
  return annihilator(f, grid, fock).adjoint();
}

FieldOperator field_op(const CVec& f, const DoubledGrid& grid, const FockSpace& fock) {
  FieldOperator a = annihilator(f, grid, fock);
  FieldOperator ad = a.adjoint();
  return (a + ad) * (1.0 / std::sqrt(2.0));
}

RVec second_quantize_diagonal(const RVec& h, const FockSpace& fock) {
  RVec d(fock.dimension());
  for (int k = 0; k < fock.dimension(); ++k) {
    double s = 0;
    for (int j : fock.state(k)) s += h[j];
    d[k] = s;
  }
  return d;
}

FieldOperator second_quantize(const RVec& h, const FockSpace& fock) {
  RVec d = second_quantize_diagonal(h, fock);
  std::vector<Triplet> t;
  for (int k = 0; k < d.size(); ++k)
    if (d[k] != 0.0) t.emplace_back(k, k, d[k]);
  FieldOperator out(fock.dimension(), fock.dimension());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

FieldOperator second_quantize(const CMat& h, const FockSpace& fock) {
  const int m = fock.mode_count();
  if (h.rows() != m || h.cols() != m) throw ValidationError("second_quantize: one-particle size mismatch");
  std::vector<Triplet> t;
  for (int col = 0; col < fock.dimension(); ++col) {
    const auto& s = fock.state(col);
    for (std::size_t p = 0; p < s.size(); ++p) {
      if (p > 0 && s[p] == s[p - 1]) continue;
      const int k = s[p];
      const double nk = fock.occupation(col, k);
      std::vector<int> lowered = s;
      lowered.erase(lowered.begin() + p);
      for (int j = 0; j < m; ++j) {
        if (h(j, k) == cplx(0.0)) continue;
        std::vector<int> raised = lowered;
        raised.insert(std::upper_bound(raised.begin(), raised.end(), j), j);
        const int row = fock.index_of(raised);
        const double nj = static_cast<double>(std::count(raised.begin(), raised.end(), j));
        t.emplace_back(row, col, h(j, k) * std::sqrt(nk * nj));
      }
    }
  }
  FieldOperator out(fock.dimension(), fock.dimension());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

FieldOperator number_operator(const FockSpace& fock) {
  return second_quantize(RVec(RVec::Ones(fock.mode_count())), fock);
}

CMat central_difference(const DoubledGrid& grid) {
  if (!grid.uniform()) throw UnsupportedGridError("translation generator requires a uniform grid");
  const int n = grid.size();
  CMat s = CMat::Zero(n, n);
  const double c = 1.0 / (2.0 * grid.spacing);
  for (int j = 0; j + 1 < n; ++j) {
    s(j, j + 1) = c;
    s(j + 1, j) = -c;
  }
  return s;
}

CMat translation_generator(const DoubledGrid& grid) {
  return cplx(0, 1) * central_difference(grid);
}

}  // namespace llab
