#include "llab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "llab/errors.hpp"

namespace llab {

std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

namespace {

class Reader {
 public:
  std::vector<std::string> issues;

  const json* child(const json& j, const std::string& path, const std::string& key, bool required = true) {
    if (!j.is_object()) {
      issues.push_back(path + ": expected an object");
      return nullptr;
    }
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) issues.push_back(path + "." + key + ": missing");
      return nullptr;
    }
    return &*it;
  }

  double number(const json& j, const std::string& path, const std::string& key, double fallback, bool required) {
    const json* v = child(j, path, key, required);
    if (!v) return fallback;
    if (!v->is_number()) {
      issues.push_back(path + "." + key + ": expected a number");
      return fallback;
    }
    return v->get<double>();
  }

  int integer(const json& j, const std::string& path, const std::string& key, int fallback, bool required) {
    const json* v = child(j, path, key, required);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      issues.push_back(path + "." + key + ": expected an integer");
      return fallback;
    }
    return v->get<int>();
  }

  // Scalar or explicit list.
  std::vector<double> ladder(const json& j, const std::string& path, const std::string& key, bool required) {
    const json* v = child(j, path, key, required);
    std::vector<double> out;
    if (!v) return out;
    if (v->is_number()) return {v->get<double>()};
    if (!v->is_array() || v->empty()) {
      issues.push_back(path + "." + key + ": expected a number or a nonempty list");
      return out;
    }
    for (const auto& x : *v) {
      if (!x.is_number()) {
        issues.push_back(path + "." + key + ": list entries must be numbers");
        return {};
      }
      out.push_back(x.get<double>());
    }
    return out;
  }

  void check(bool ok, const std::string& msg) {
    if (!ok) issues.push_back(msg);
  }
};

void read_known(const json& j, const std::string& path, const std::vector<std::string>& keys, Reader& r) {
  if (!j.is_object()) return;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      r.issues.push_back(path + "." + it.key() + ": unknown key");
}

}  // namespace

RunConfig parse_config(const json& j) {
  Reader r;
  RunConfig c;
  c.raw = j;
  c.hash = config_hash(j);
  if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");
  read_known(j, "config", {"atom", "window", "field", "couplings", "params", "fgr", "seed", "outputs", "limits"}, r);

  // atom
  if (const json* a = r.child(j, "config", "atom")) {
    read_known(*a, "atom", {"discrete_levels", "continuum"}, r);
    if (const json* lv = r.child(*a, "atom", "discrete_levels")) {
      if (!lv->is_array()) r.issues.push_back("atom.discrete_levels: expected a list");
      else
        for (std::size_t k = 0; k < lv->size(); ++k) {
          const std::string p = "atom.discrete_levels[" + std::to_string(k) + "]";
          DiscreteLevel d;
          d.energy = r.number((*lv)[k], p, "energy", 0.0, true);
          d.degeneracy = r.integer((*lv)[k], p, "degeneracy", 1, false);
          c.atom.discrete_levels.push_back(d);
        }
    }
    if (const json* ct = r.child(*a, "atom", "continuum")) {
      read_known(*ct, "atom.continuum", {"e_min", "e_max", "n_points", "scheme"}, r);
      const double lo = r.number(*ct, "atom.continuum", "e_min", 0.0, true);
      const double hi = r.number(*ct, "atom.continuum", "e_max", 0.0, true);
      const int n = r.integer(*ct, "atom.continuum", "n_points", 0, true);
      std::string scheme = ct->value("scheme", std::string("gauss_legendre"));
      if (scheme == "uniform") c.continuum_scheme = ContinuumScheme::uniform;
      else if (scheme == "gauss_legendre") c.continuum_scheme = ContinuumScheme::gauss_legendre;
      else r.issues.push_back("atom.continuum.scheme: expected 'uniform' or 'gauss_legendre'");
      r.check(n >= 0, "atom.continuum.n_points must be >= 0");
      if (n > 0 && lo > 0 && hi > lo) c.atom.continuum = make_continuum(lo, hi, n, c.continuum_scheme);
      else {
        c.atom.continuum.e_min = lo;
        c.atom.continuum.e_max = hi;
        c.atom.continuum.n_points = n;
      }
    }
    try {
      validate(c.atom);
    } catch (const ValidationError& e) {
      for (const auto& s : e.issues()) r.issues.push_back("atom: " + s);
    }
  }

  // window
  if (const json* w = r.child(j, "config", "window")) {
    read_known(*w, "window", {"coupled_levels", "r", "R", "margin"}, r);
    if (const json* cl = r.child(*w, "window", "coupled_levels")) {
      if (!cl->is_array()) r.issues.push_back("window.coupled_levels: expected a list of discrete level indices");
      else
        for (const auto& x : *cl) {
          if (!x.is_number_integer()) {
            r.issues.push_back("window.coupled_levels: entries must be integers");
            continue;
          }
          c.coupled_levels.push_back(x.get<int>());
        }
    }
    c.window.r = r.number(*w, "window", "r", 0.0, true);
    c.window.R = r.number(*w, "window", "R", 0.0, true);
    c.window.smoothing_margin = r.number(*w, "window", "margin", 0.0, true);
    for (int lvl : c.coupled_levels) {
      if (lvl < 0 || lvl >= static_cast<int>(c.atom.discrete_levels.size())) {
        r.issues.push_back("window.coupled_levels: level " + std::to_string(lvl) + " does not exist");
        continue;
      }
      for (int b : c.atom.basis_of_level(lvl)) c.window.coupled_discrete.push_back(b);
    }
    try {
      validate(c.window, c.atom, true);
    } catch (const ValidationError& e) {
      for (const auto& s : e.issues()) r.issues.push_back("window: " + s);
    }
  }

  // field
  if (const json* f = r.child(j, "config", "field")) {
    read_known(*f, "field", {"u_max", "n_u", "n_max"}, r);
    c.u_max = r.number(*f, "field", "u_max", 0.0, true);
    c.n_u = r.integer(*f, "field", "n_u", 0, true);
    c.n_max = r.integer(*f, "field", "n_max", 1, false);
    r.check(c.u_max > 0, "field.u_max must be > 0");
    r.check(c.n_u >= 2 && c.n_u % 2 == 0, "field.n_u must be even and >= 2 (u = 0 is excluded)");
    r.check(c.n_max >= 1, "field.n_max must be >= 1");
  }

  // couplings
  const int dim = c.atom.dimension();
  if (const json* cs = r.child(j, "config", "couplings")) {
    if (!cs->is_array() || cs->empty()) r.issues.push_back("couplings: expected a nonempty list");
    else
      for (std::size_t k = 0; k < cs->size(); ++k) {
        const json& e = (*cs)[k];
        const std::string p = "couplings[" + std::to_string(k) + "]";
        read_known(e, p, {"template", "scale", "zero_diagonal", "dark_levels", "matrix", "form_factor"}, r);
        CouplingConfig cc;
        if (e.contains("matrix")) {
          cc.from_template = false;
          const json& m = e["matrix"];
          if (!m.is_array() || static_cast<int>(m.size()) != dim * dim) {
            r.issues.push_back(p + ".matrix: expected " + std::to_string(dim * dim) +
                               " [re, im] pairs in row-major order");
          } else {
            cc.matrix.resize(dim, dim);
            for (int i = 0; i < dim * dim; ++i) {
              const json& pr = m[i];
              if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number() || !pr[1].is_number()) {
                r.issues.push_back(p + ".matrix: entry " + std::to_string(i) + " is not a [re, im] pair");
                break;
              }
              cc.matrix(i / dim, i % dim) = cplx(pr[0].get<double>(), pr[1].get<double>());
            }
            if (cc.matrix.size() && (cc.matrix - cc.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
              r.issues.push_back(p + ".matrix: coupling must be Hermitian");
          }
        } else {
          const std::string t = e.value("template", std::string());
          if (t != "dipole-like") r.issues.push_back(p + ".template: expected 'dipole-like' or a 'matrix'");
          cc.scale = r.number(e, p, "scale", 1.0, false);
          cc.zero_diagonal = e.value("zero_diagonal", false);
        }
        if (e.contains("dark_levels")) {
          for (const auto& x : e["dark_levels"]) {
            const int lvl = x.is_number_integer() ? x.get<int>() : -1;
            if (lvl < 0 || lvl >= static_cast<int>(c.atom.discrete_levels.size()))
              r.issues.push_back(p + ".dark_levels: invalid level");
            else
              cc.dark_levels.push_back(lvl);
          }
        }
        if (const json* ff = r.child(e, p, "form_factor")) {
          const std::string fp = p + ".form_factor";
          read_known(*ff, fp, {"template", "p", "Lambda", "amplitude"}, r);
          if (ff->value("template", std::string()) != "power-exp")
            r.issues.push_back(fp + ".template: expected 'power-exp'");
          cc.form_factor.p = r.number(*ff, fp, "p", 3.0, true);
          cc.form_factor.lambda = r.number(*ff, fp, "Lambda", 1.0, true);
          cc.form_factor.amplitude = r.number(*ff, fp, "amplitude", 1.0, false);
          r.check(cc.form_factor.p > 2, fp + ".p must exceed 2 (infrared condition)");
          r.check(cc.form_factor.lambda > 0, fp + ".Lambda must be > 0");
        }
        c.couplings.push_back(cc);
      }
  }

  // params
  if (const json* p = r.child(j, "config", "params")) {
    read_known(*p, "params", {"beta", "lambda", "epsilon", "betas", "theta", "delta_width", "zero_tol", "bridge_tol",
                              "certificate_tol", "p_weight"},
               r);
    c.beta = r.number(*p, "params", "beta", 1.0, true);
    c.lambdas = r.ladder(*p, "params", "lambda", true);
    c.epsilons = r.ladder(*p, "params", "epsilon", true);
    c.betas = r.ladder(*p, "params", "betas", false);
    c.theta = r.number(*p, "params", "theta", 0.0, true);
    c.delta_width = r.number(*p, "params", "delta_width", 0.0, true);
    c.zero_tol = r.number(*p, "params", "zero_tol", 1e-10, false);
    c.bridge_tol = r.number(*p, "params", "bridge_tol", 0.15, false);
    c.certificate_tol = r.number(*p, "params", "certificate_tol", 0.25, false);
    const std::string pw = p->value("p_weight", std::string("p_c"));
    if (pw == "p_c") c.p_weight = PWeight::p_c;
    else if (pw == "mu2") c.p_weight = PWeight::mu2;
    else r.issues.push_back("params.p_weight: expected 'p_c' or 'mu2'");
    r.check(c.beta > 0, "params.beta must be > 0");
    for (double e : c.epsilons) r.check(e > 0, "params.epsilon entries must be > 0");
    for (double b : c.betas) r.check(b > 0, "params.betas entries must be > 0");
    r.check(c.theta > 0, "params.theta must be > 0");
    r.check(c.zero_tol > 0, "params.zero_tol must be > 0");
    if (c.delta_width > 0 && !c.window.coupled_discrete.empty() && r.issues.empty()) {
      const ParticleOperator h = build_hamiltonian(c.atom);
      const double lim = max_delta_width(h, c.window);
      if (!(c.delta_width < lim)) {
        std::ostringstream os;
        os << "params.delta_width=" << c.delta_width << " violates the interval condition: it must stay below "
           << lim << " (half the smallest gap between distinct coupled discrete energies)";
        r.issues.push_back(os.str());
      }
    } else if (!(c.delta_width > 0)) {
      r.issues.push_back("params.delta_width must be > 0");
    }
    if (c.theta > 0 && c.window.r > 0 && !(c.theta < c.window.r / 32))
      c.warnings.push_back("theta is outside (0, r/32); certificates run outside the proven regime");
  }

  if (const json* f = r.child(j, "config", "fgr", false)) {
    read_known(*f, "fgr", {"gl_order", "omega_max"}, r);
    c.gl_order = r.integer(*f, "fgr", "gl_order", 16, false);
    c.omega_max = r.number(*f, "fgr", "omega_max", 0.0, false);
    r.check(c.gl_order >= 2 && c.gl_order <= 64, "fgr.gl_order must be in [2, 64]");
  }
  if (const json* l = r.child(j, "config", "limits", false)) {
    read_known(*l, "limits", {"max_dense_dim", "dump_matrices"}, r);
    c.max_dense_dim = r.integer(*l, "limits", "max_dense_dim", 3000, false);
    c.dump_matrices = l->value("dump_matrices", false);
  }
  if (const json* s = r.child(j, "config", "seed", false)) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
      r.issues.push_back("seed: expected a non-negative integer");
    else
      c.seed = s->get<std::uint64_t>();
  }
  if (const json* o = r.child(j, "config", "outputs", false)) {
    if (!o->is_string()) r.issues.push_back("outputs: expected a directory path string");
    else c.outputs = o->get<std::string>();
  }
  if (!r.issues.empty()) throw ValidationError(r.issues);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

FgrModel Model::fgr_model() const {
  FgrModel m;
  m.hp = hp;
  m.form_factors = form_factors;
  if (cfg.p_weight == PWeight::p_c) {
    m.couplings = couplings;
  } else {
    m.couplings = raw_couplings;
  }
  m.p_weight = p_weight_diagonal(hp, modes, cfg.p_weight, &cfg.window);
  return m;
}

FgrParams Model::fgr_params(double eps) const {
  FgrParams p;
  p.eps = eps;
  p.gl_order = cfg.gl_order;
  p.omega_max = cfg.omega_max;
  return p;
}

SpMat Model::L(double lambda) const { return assemble_L(l0, interaction, lambda).matrix; }

Model build_model(const RunConfig& cfg) { return build_model(cfg, cfg.beta); }

Model build_model(const RunConfig& cfg, double beta) {
  Model m;
  m.cfg = cfg;
  m.beta = beta;
  m.hp = build_hamiltonian(cfg.atom);
  m.modes = cfg.atom.modes();
  m.grid = make_doubled_grid(cfg.u_max, cfg.n_u);
  const RadialGrid radial = m.grid.positive_half();
  for (const auto& cc : cfg.couplings) {
    ParticleOperator g = cc.from_template ? dipole_like_coupling(m.hp, cc.scale, cc.zero_diagonal) : cc.matrix;
    for (int lvl : cc.dark_levels) g = decouple(g, cfg.atom.basis_of_level(lvl));
    m.raw_couplings.push_back(g);
    m.couplings.push_back(regularize_coupling(g, m.hp, cfg.window, m.modes));
    m.form_factors.push_back(power_exp_form_factor(radial, cc.form_factor));
  }
  m.fock = FockSpace(m.grid.size(), cfg.n_max);
  const int d = static_cast<int>(m.hp.rows());
  m.space = TriSpace{d, m.fock.dimension()};
  const RVec du = second_quantize_diagonal(m.grid.nodes, m.fock);
  m.l0 = assemble_L0(m.hp, du, m.fock.dimension());
  m.l0.beta = beta;
  m.l0.window = cfg.window;
  m.l0_diag = m.l0.matrix.diagonal().real();
  m.data = interaction_data(m.couplings, m.form_factors, beta, m.grid, kIsotropicAngularFactor);
  m.interaction = assemble_interaction(m.data, d, m.grid, m.fock, beta);
  m.interaction.window = cfg.window;
  const RVec n1 = second_quantize_diagonal(RVec(RVec::Ones(m.grid.size())), m.fock);
  m.number_diag.resize(m.space.dimension());
  for (int f = 0; f < m.space.dimension(); ++f) m.number_diag[f] = n1[f % m.fock.dimension()];
  m.kit = projection_kit(m.hp, m.modes, cfg.window, m.fock, m.l0_diag, cfg.delta_width);
  return m;
}

int degenerate_pair_count(const ParticleOperator& hp, double cluster_tol) {
  const RVec e = energies(hp);
  int n = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    for (Eigen::Index j = 0; j < e.size(); ++j)
      if (std::abs(e[i] - e[j]) <= cluster_tol) ++n;
  return n;
}

}  // namespace llab
