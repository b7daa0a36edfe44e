#include "llab/report_cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "llab/commutator_lab.hpp"
#include "llab/errors.hpp"
#include "llab/fgr.hpp"

namespace llab {

namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + tmp);
  }
  fs::rename(tmp, p);
}

namespace {
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::uint64_t hash_value(const std::string& hex) {
  return hex.empty() ? 0 : std::stoull(hex, nullptr, 16);
}

template <typename T>
void put(std::string& s, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  s.append(b, sizeof(T));
}

template <typename T>
T get(const std::string& s, std::size_t& pos) {
  if (pos + sizeof(T) > s.size()) throw ValidationError("matrix dump truncated");
  T v;
  std::memcpy(&v, s.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}
}  // namespace

std::string csv_text(const std::string& hash, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os << "# config_hash=" << hash << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
    os << "\n";
  }
  return os.str();
}

std::string matrix_dump(const CMat& m, const std::string& hash) {
  static_assert(sizeof(double) == 8);
  std::string s = "LLABMAT1";
  put<std::uint64_t>(s, hash_value(hash));
  put<std::int64_t>(s, m.rows());
  put<std::int64_t>(s, m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      put<double>(s, m(i, j).real());
      put<double>(s, m(i, j).imag());
    }
  return s;
}

CMat read_matrix_dump(const std::string& bytes, std::string* hash) {
  if (bytes.compare(0, 8, "LLABMAT1") != 0) throw ValidationError("not a matrix dump");
  std::size_t pos = 8;
  const auto h = get<std::uint64_t>(bytes, pos);
  const auto rows = get<std::int64_t>(bytes, pos);
  const auto cols = get<std::int64_t>(bytes, pos);
  if (rows < 0 || cols < 0) throw ValidationError("matrix dump has negative dimensions");
  CMat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = get<double>(bytes, pos);
      const double im = get<double>(bytes, pos);
      m(i, j) = cplx(re, im);
    }
  if (hash) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    *hash = os.str();
  }
  return m;
}

json merge_reports(const json& a, const json& b) {
  if (a.value("config_hash", std::string()) != b.value("config_hash", std::string()))
    throw ValidationError("refusing to merge reports with different config hashes");
  json out = a;
  for (auto it = b["results"].begin(); it != b["results"].end(); ++it) out["results"][it.key()] = it.value();
  return out;
}

json strip_timing(const json& report) {
  json out = report;
  out.erase("timing");
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  threads = std::max(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int resolve_threads(int requested) {
  if (const char* env = std::getenv("LLAB_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (...) {
    }
  }
  return std::max(1, requested);
}

json to_json(const SuiteResult& s) {
  return {{"module", s.module}, {"name", s.name}, {"pass", s.pass}, {"value", s.value}, {"tol", s.tol},
          {"detail", s.detail}};
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"validate", "build", "fgr", "spectrum", "certify", "diagnose", "sweep",
                                          "selftest"};
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

json cmat_json(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(r);
  }
  return rows;
}

class Outputs {
 public:
  Outputs(const RunContext& ctx, const RunConfig& cfg) : dir_(ctx.out_dir), hash_(cfg.hash) {}
  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) {
    write(name, csv_text(hash_, header, rows));
  }
  void write(const std::string& name, const std::string& content) {
    write_atomic((fs::path(dir_) / name).string(), content);
    files.push_back(name);
  }
  std::vector<std::string> files;

 private:
  std::string dir_, hash_;
};

json rate_json(const RateReport& r, double eps, double beta, const std::string& op) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"energy", e.energy},
                       {"gamma_E", e.gamma},
                       {"rank", e.rank},
                       {"fgr_matrix", cmat_json(e.matrix)},
                       {"ionization_time", std::isfinite(e.ionization_time) ? json(e.ionization_time) : json("inf")}});
  return {{"operation", op}, {"params", {{"epsilon", eps}, {"beta", beta}}}, {"entries", entries}, {"gamma", r.gamma}};
}

json bridge_json(const BridgeRecord& b, double eps) {
  return {{"operation", "oracle_fgr_bound"},
          {"params", {{"epsilon", eps}, {"tol", b.tol}}},
          {"lambda_min", b.lambda_min},
          {"gamma_over_eps", b.gamma_over_eps},
          {"ratio", b.ratio},
          {"pass", b.pass}};
}

json cert_json(const CertificateReport& c) {
  return {{"operation", "certify_gap"},
          {"params",
           {{"lambda", c.lambda}, {"theta", c.theta}, {"epsilon", c.eps}, {"delta_width", c.delta_width},
            {"tol", c.tol}}},
          {"name", c.name},
          {"inequality", c.inequality},
          {"gamma", c.gamma},
          {"lambda_min", c.lambda_min},
          {"bound", c.bound},
          {"margin", c.margin},
          {"block_dimension", c.block_dimension},
          {"degenerate", c.degenerate},
          {"pass", c.pass},
          {"warnings", c.warnings}};
}

struct CertPoint {
  CertificateReport report;
  double a0_identity_defect = 0.0;
  double pm1p_norm = 0.0;
};

CertPoint certificate_at(const Model& m, double lambda, double eps, double gamma) {
  CertPoint p;
  const SpMat l = m.L(lambda);
  const SpMat af = build_Af(m.grid, m.fock, m.space.d);
  const ConjugateKit ck = conjugate_kit(af, m.interaction.matrix, m.kit, m.l0_diag, m.cfg.theta, eps, lambda);
  const SpMat c1 = commutator(l, af);
  const Certificates cert = assemble_certificates(l, c1, ck, m.kit, m.hp, m.cfg.window, m.fock.dimension(), lambda);
  p.report = certify_gap(cert.m0, m.kit, gamma, lambda, m.cfg.theta, eps, m.cfg.certificate_tol);
  p.report.warnings = regime_warnings(m.cfg.window, m.cfg.theta, eps, lambda);
  p.a0_identity_defect = a0_identity_defect(l, ck, m.interaction.matrix, m.kit, lambda);
  p.pm1p_norm = cert.pm1p_norm;
  return p;
}

// Positive values only; NaN when fewer than two remain.
double safe_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> a, b;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0 && y[i] > 0) {
      a.push_back(x[i]);
      b.push_back(y[i]);
    }
  if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return loglog_slope(a, b);
}

IndexList p_block(const Model& m) { return support(m.kit.p); }

RunOutcome do_validate(const RunConfig& cfg, Outputs& out) {
  RunOutcome o;
  const long long fock = FockSpace::expected_dimension(cfg.n_u, cfg.n_max);
  const long long d = cfg.atom.dimension();
  o.report["results"]["validate"] = {{"operation", "validate"},
                                     {"valid", true},
                                     {"warnings", cfg.warnings},
                                     {"atom_dimension", d},
                                     {"fock_dimension", fock},
                                     {"total_dimension", d * d * fock}};
  (void)out;
  return o;
}

RunOutcome do_build(const Model& m, Outputs& out) {
  RunOutcome o;
  json r;
  r["operation"] = "build";
  r["dimensions"] = {{"atom", m.space.d}, {"fock", m.fock.dimension()}, {"total", m.space.dimension()}};
  r["hermitian_defect"] = {{"L0", hermitian_defect(m.l0.matrix)}, {"I", hermitian_defect(m.interaction.matrix)}};
  const IndexList pi = support(m.kit.pi);
  r["pi_I_pi_max"] = dense_block(m.interaction.matrix, pi).cwiseAbs().maxCoeff();
  r["ranks"] = {{"Pi", m.kit.pi.sum()},         {"P", m.kit.p.sum()},
                {"P_left", m.kit.p_left.sum()}, {"P_right", m.kit.p_right.sum()},
                {"P_zero", m.kit.p_zero.sum()}, {"E_Delta_P", m.kit.p.cwiseProduct(m.kit.e_delta).sum()}};
  json blocks = json::array();
  bool ok = true;
  for (double lam : m.cfg.lambdas) {
    const auto b = block_reduction_check(m.L(lam), m.l0.matrix, m.kit);
    ok = ok && b.pass;
    blocks.push_back({{"operation", "block_reduction_check"},
                      {"params", {{"lambda", lam}}},
                      {"max_commutator", b.max_commutator},
                      {"p_zero_defect", b.p_zero_defect},
                      {"pass", b.pass}});
  }
  r["block_reduction"] = blocks;
  out.write("H_p.bin", matrix_dump(m.hp, m.cfg.hash));
  for (std::size_t a = 0; a < m.couplings.size(); ++a) {
    out.write("G_" + std::to_string(a) + ".bin", matrix_dump(m.couplings[a], m.cfg.hash));
    std::vector<std::vector<double>> rows;
    const auto& f = m.form_factors[a];
    for (Eigen::Index i = 0; i < f.grid.nodes.size(); ++i)
      rows.push_back({f.grid.nodes[i], f.grid.weights[i], f.samples[i].real(), f.samples[i].imag()});
    out.csv("form_factor_" + std::to_string(a) + ".csv", {"node", "weight", "re", "im"}, rows);
  }
  if (m.cfg.dump_matrices && m.space.dimension() <= m.cfg.max_dense_dim) {
    out.write("L0.bin", matrix_dump(CMat(m.l0.matrix), m.cfg.hash));
    out.write("I.bin", matrix_dump(CMat(m.interaction.matrix), m.cfg.hash));
  }
  r["pass"] = ok;
  o.report["results"]["build"] = r;
  o.exit_code = ok ? kExitOk : kExitNumerical;
  return o;
}

RunOutcome do_fgr(const Model& m, Outputs& out) {
  RunOutcome o;
  json rates = json::array(), bridges = json::array();
  std::vector<std::vector<double>> rows, plot;
  bool ok = true;
  const FgrModel fm = m.fgr_model();
  const double lam = m.cfg.lambdas.front();
  for (double eps : m.cfg.epsilons) {
    const FgrParams fp = m.fgr_params(eps);
    const RateReport gl = rate_report(fm, m.modes, m.cfg.window, fp, m.beta, lam);
    const RateReport orc = rate_report(fm, m.modes, m.cfg.window, fp, m.beta, lam, true);
    rates.push_back(rate_json(gl, eps, m.beta, "fgr_matrix"));
    rates.push_back(rate_json(orc, eps, m.beta, "oracle_fgr_matrix"));
    for (std::size_t k = 0; k < gl.entries.size(); ++k)
      rows.push_back({eps, gl.entries[k].energy, gl.entries[k].gamma, orc.entries[k].gamma,
                      double(gl.entries[k].rank), gl.entries[k].ionization_time});
    const BridgeRecord b = oracle_fgr_bound(m.interaction.matrix, m.kit, m.l0_diag, orc.gamma, eps, m.cfg.bridge_tol);
    ok = ok && b.pass;
    bridges.push_back(bridge_json(b, eps));
    plot.push_back({eps, b.ratio});
    if (lam != 0.0 && gl.gamma > 0 && m.cfg.zero_tol * 100 > lam * lam * gl.gamma)
      o.report["results"]["warnings"].push_back("zero_tol is within two decades of the expected FGR shift");
  }
  out.csv("rates.csv", {"epsilon", "energy", "gamma_E", "gamma_E_oracle", "rank", "t_E"}, rows);
  out.csv("epsilon_bound_ratio.csv", {"epsilon", "bound_ratio"}, plot);
  o.report["results"]["rates"] = rates;
  o.report["results"]["bridge"] = bridges;
  o.exit_code = ok ? kExitOk : kExitNumerical;
  return o;
}

RunOutcome do_spectrum(const Model& m, Outputs& out) {
  RunOutcome o;
  json reps = json::array();
  std::vector<std::vector<double>> rows;
  std::vector<double> lams{0.0};
  for (double l : m.cfg.lambdas) lams.push_back(l);
  const int i1 = degenerate_pair_count(m.hp);
  bool ok = true;
  const struct {
    const char* name;
    const RVec* mask;
    int code;
  } blocks[] = {{"P", &m.kit.p, 0}, {"P_left", &m.kit.p_left, 1}, {"P_right", &m.kit.p_right, 2},
                {"P_zero", &m.kit.p_zero, 3}};
  for (double lam : lams) {
    const SpMat l = m.L(lam);
    json rec{{"operation", "kernel_report"}, {"params", {{"lambda", lam}, {"zero_tol", m.cfg.zero_tol}}}};
    int kernel_total = 0;
    bool complete = true;
    for (const auto& b : blocks) {
      const IndexList idx = support(*b.mask);
      if (idx.empty()) continue;
      json br{{"block", b.name}, {"dimension", idx.size()}};
      if (static_cast<int>(idx.size()) > m.cfg.max_dense_dim) {
        br["skipped"] = "block exceeds limits.max_dense_dim";
        complete = false;
        rec["blocks"].push_back(br);
        continue;
      }
      const KernelReport kr = kernel_report(l, m.kit, m.cfg.zero_tol, idx);
      kernel_total += static_cast<int>(kr.candidates.size());
      br["kernel_dimension"] = kr.candidates.size();
      br["min_abs_eigenvalue"] = kr.min_abs_eigenvalue;
      json cands = json::array();
      for (const auto& c : kr.candidates)
        cands.push_back({{"eigenvalue", c.eigenvalue},
                         {"overlap_pi", c.overlap_pi},
                         {"overlap_vacuum_complement", c.overlap_vacuum_complement},
                         {"overlap_excited", c.overlap_excited}});
      br["candidates"] = cands;
      for (Eigen::Index k = 0; k < kr.eigenvalues.size(); ++k) rows.push_back({lam, double(b.code), kr.eigenvalues[k]});
      rec["blocks"].push_back(br);
    }
    rec["kernel_dimension"] = complete ? json(kernel_total) : json(nullptr);
    if (lam == 0.0) {
      rec["i1_count"] = i1;
      if (complete) {
        rec["i1_match"] = kernel_total == i1;
        ok = ok && kernel_total == i1;
      }
    }
    reps.push_back(rec);
  }
  out.csv("spectrum.csv", {"lambda", "block", "eigenvalue"}, rows);
  o.report["results"]["spectrum"] = reps;
  o.report["results"]["block_codes"] = {{"P", 0}, {"P_left", 1}, {"P_right", 2}, {"P_zero", 3}};
  o.exit_code = ok ? kExitOk : kExitNumerical;
  return o;
}

RunOutcome do_certify(const Model& m, Outputs& out, int threads) {
  RunOutcome o;
  const FgrModel fm = m.fgr_model();
  const auto& lams = m.cfg.lambdas;
  const auto& epss = m.cfg.epsilons;
  std::vector<double> gammas(epss.size());
  parallel_for(static_cast<int>(epss.size()), threads, [&](int k) {
    gammas[k] = rate_report(fm, m.modes, m.cfg.window, m.fgr_params(epss[k]), m.beta, lams.front()).gamma;
  });
  const int n = static_cast<int>(lams.size() * epss.size());
  std::vector<CertPoint> pts(n);
  parallel_for(n, threads, [&](int i) {
    const int a = i / static_cast<int>(epss.size()), e = i % static_cast<int>(epss.size());
    pts[i] = certificate_at(m, lams[a], epss[e], gammas[e]);
  });
  json certs = json::array();
  std::vector<std::vector<double>> rows;
  bool ok = true;
  for (int i = 0; i < n; ++i) {
    json c = cert_json(pts[i].report);
    c["a0_identity_defect"] = pts[i].a0_identity_defect;
    c["pm1p_norm"] = pts[i].pm1p_norm;
    certs.push_back(c);
    ok = ok && pts[i].report.pass && pts[i].pm1p_norm <= 1e-12;
    rows.push_back({pts[i].report.lambda, pts[i].report.eps, pts[i].report.lambda_min, pts[i].report.bound,
                    pts[i].report.margin, pts[i].report.pass ? 1.0 : 0.0});
  }
  out.csv("certificates.csv", {"lambda", "epsilon", "lambda_min", "bound", "margin", "pass"}, rows);
  json slopes;
  if (lams.size() >= 2) {
    std::vector<double> mg;
    for (std::size_t a = 0; a < lams.size(); ++a) mg.push_back(pts[a * epss.size()].report.margin);
    slopes["lambda"] = {{"x", lams}, {"margin", mg}, {"loglog_slope", safe_slope(lams, mg)}};
  }
  if (epss.size() >= 2) {
    std::vector<double> mg;
    for (std::size_t e = 0; e < epss.size(); ++e) mg.push_back(pts[e].report.margin);
    slopes["epsilon"] = {{"x", epss}, {"margin", mg}, {"loglog_slope", safe_slope(epss, mg)}};
  }
  o.report["results"]["certificates"] = certs;
  o.report["results"]["slopes"] = slopes;
  o.exit_code = ok ? kExitOk : kExitNumerical;
  return o;
}

RunOutcome do_diagnose(const Model& m, Outputs& out, int threads) {
  RunOutcome o;
  const IndexList block = p_block(m);
  if (static_cast<int>(block.size()) > m.cfg.max_dense_dim) {
    o.report["results"]["diagnose"] = {{"operation", "eigen_diagnostics"},
                                       {"skipped", "P block exceeds limits.max_dense_dim"},
                                       {"dimension", block.size()}};
    return o;
  }
  const auto& lams = m.cfg.lambdas;
  const double eps = m.cfg.epsilons.front();
  const SpMat af = build_Af(m.grid, m.fock, m.space.d);
  const double af_norm = spectral_norm(af);
  struct Point {
    EigendiagReport rep;
    double a0_norm = 0.0;
    double d_ok = true;
    C1Result c1;
  };
  std::vector<Point> pts(lams.size());
  parallel_for(static_cast<int>(lams.size()), threads, [&](int i) {
    const double lam = lams[i];
    const SpMat l = m.L(lam);
    const ConjugateKit ck = conjugate_kit(af, m.interaction.matrix, m.kit, m.l0_diag, m.cfg.theta, eps, lam);
    const HermitianEigen eig = eigh(dense_block(l, block));
    pts[i].rep = eigen_diagnostics(eig, block, m.l0_diag, m.kit, m.number_diag,
                                   {commutator(l, af), commutator(l, ck.a_0)}, m.cfg.zero_tol);
    pts[i].a0_norm = spectral_norm(ck.a_0);
    build_D(m.data, m.grid, m.fock, lam, l);
    pts[i].c1 = build_C1(l, m.l0.matrix, af, m.data, m.grid, m.fock, lam);
  });
  json recs = json::array();
  std::vector<std::vector<double>> rows, plot;
  std::vector<double> nb;
  bool ok = true;
  for (std::size_t i = 0; i < lams.size(); ++i) {
    const auto& p = pts[i];
    double vir_f = 0, vir_0 = 0;
    for (const auto& r : p.rep.rows) {
      vir_f = std::max(vir_f, r.virial[0]);
      vir_0 = std::max(vir_0, r.virial[1]);
      rows.push_back({lams[i], r.eigenvalue, r.number_bound, r.vacuum_complement, r.distance_to_ker_l0, r.virial[0],
                      r.virial[1]});
    }
    const bool gate = vir_f <= 1e-9 * af_norm && vir_0 <= 1e-9 * std::max(p.a0_norm, 1e-300);
    ok = ok && gate;
    nb.push_back(p.rep.max_number_bound);
    plot.push_back({lams[i], p.rep.max_number_bound});
    recs.push_back({{"operation", "eigen_diagnostics"},
                    {"params", {{"lambda", lams[i]}, {"epsilon", eps}, {"theta", m.cfg.theta}}},
                    {"block_dimension", block.size()},
                    {"max_number_bound", p.rep.max_number_bound},
                    {"min_distance_to_ker_L0", p.rep.min_distance_to_kernel},
                    {"virial_Af", vir_f},
                    {"virial_A0", vir_0},
                    {"norm_Af", af_norm},
                    {"norm_A0", p.a0_norm},
                    {"virial_gate", gate},
                    {"D_cross_check", "pass"},
                    {"C1_max_deviation", p.c1.max_deviation},
                    {"C1_smooth_deviation", p.c1.smooth_deviation},
                    {"C1_lambda_part_deviation", p.c1.lambda_part_deviation}});
  }
  json fit;
  if (lams.size() >= 2) {
    std::vector<double> al;
    for (double l : lams) al.push_back(std::abs(l));
    const LinearFit f = fit_through_origin(al, nb);
    fit = {{"operation", "fit_through_origin"}, {"k", f.k}, {"r2", f.r2}};
  }
  out.csv("eigendiag.csv",
          {"lambda", "eigenvalue", "number_bound", "vacuum_complement", "distance_to_ker_L0", "virial_Af", "virial_A0"},
          rows);
  out.csv("lambda_max_number_bound.csv", {"lambda", "max_number_bound"}, plot);
  o.report["results"]["diagnose"] = recs;
  o.report["results"]["number_bound_fit"] = fit;
  o.exit_code = ok ? kExitOk : kExitNumerical;
  return o;
}

RunOutcome do_sweep(const RunConfig& cfg, Outputs& out, int threads) {
  RunOutcome o;
  bool ok = true;
  const double eps = cfg.epsilons.front();
  // Temperature ladder.
  if (cfg.betas.size() >= 4) {
    std::vector<RateReport> reps(cfg.betas.size());
    parallel_for(static_cast<int>(cfg.betas.size()), threads, [&](int k) {
      const Model mb = build_model(cfg, cfg.betas[k]);
      reps[k] = rate_report(mb.fgr_model(), mb.modes, cfg.window, mb.fgr_params(eps), cfg.betas[k],
                            cfg.lambdas.front(), true);
    });
    json levels = json::array();
    for (std::size_t e = 0; e < reps.front().entries.size(); ++e) {
      std::vector<double> g;
      std::vector<std::vector<double>> plot;
      for (std::size_t k = 0; k < cfg.betas.size(); ++k) {
        g.push_back(reps[k].entries[e].gamma);
        plot.push_back({cfg.betas[k], std::log(reps[k].entries[e].gamma)});
      }
      const double energy = reps.front().entries[e].energy;
      const TemperatureSweep t = temperature_sweep(energy, cfg.betas, g);
      const bool gating = e == 0;  // lowest coupled level
      const bool pass = t.relative_slope_error <= 0.15 && t.two_sided_ok;
      if (gating) ok = ok && pass;
      out.csv("beta_log_gamma_E_level" + std::to_string(e) + ".csv", {"beta", "log_gamma_E"}, plot);
      levels.push_back({{"operation", "temperature_sweep"},
                        {"params", {{"epsilon", eps}, {"betas", cfg.betas}}},
                        {"energy", energy},
                        {"gamma_E", g},
                        {"slope", t.slope},
                        {"relative_slope_error", t.relative_slope_error},
                        {"k", t.k},
                        {"two_sided_ok", t.two_sided_ok},
                        {"gating", gating},
                        {"pass", pass}});
    }
    o.report["results"]["temperature"] = levels;
  }
  // Certificate and bridge ladders at the base temperature.
  const Model m = build_model(cfg);
  const RunOutcome c = do_certify(m, out, threads);
  o.report["results"]["certificates"] = c.report["results"]["certificates"];
  o.report["results"]["certificate_slopes"] = c.report["results"]["slopes"];
  ok = ok && c.exit_code == kExitOk;
  std::vector<std::vector<double>> lam_plot, eps_plot, ratio_plot;
  for (const auto& ce : c.report["results"]["certificates"]) {
    if (ce["params"]["epsilon"].get<double>() == cfg.epsilons.front())
      lam_plot.push_back({ce["params"]["lambda"].get<double>(), ce["margin"].get<double>()});
    if (ce["params"]["lambda"].get<double>() == cfg.lambdas.front())
      eps_plot.push_back({ce["params"]["epsilon"].get<double>(), ce["margin"].get<double>()});
  }
  out.csv("lambda_certificate_margin.csv", {"lambda", "certificate_margin"}, lam_plot);
  out.csv("epsilon_certificate_margin.csv", {"epsilon", "certificate_margin"}, eps_plot);
  json bridges = json::array();
  const FgrModel fm = m.fgr_model();
  for (double e : cfg.epsilons) {
    const RateReport orc = rate_report(fm, m.modes, cfg.window, m.fgr_params(e), m.beta, cfg.lambdas.front(), true);
    const BridgeRecord b = oracle_fgr_bound(m.interaction.matrix, m.kit, m.l0_diag, orc.gamma, e, cfg.bridge_tol);
    bridges.push_back(bridge_json(b, e));
    ratio_plot.push_back({e, b.ratio});
  }
  out.csv("epsilon_bound_ratio.csv", {"epsilon", "bound_ratio"}, ratio_plot);
  o.report["results"]["bridge"] = bridges;
  o.exit_code = ok ? kExitOk : kExitNumerical;
  return o;
}

RunOutcome do_selftest(const Model& m, std::uint64_t seed) {
  RunOutcome o;
  const auto suites = run_invariant_suites(m, seed);
  json arr = json::array();
  bool ok = true;
  for (const auto& s : suites) {
    arr.push_back(to_json(s));
    ok = ok && s.pass;
  }
  o.report["results"]["selftest"] = {{"operation", "run_invariant_suites"},
                                     {"params", {{"seed", seed}}},
                                     {"suites", arr},
                                     {"all_pass", ok}};
  o.exit_code = ok ? kExitOk : kExitNumerical;
  return o;
}

}  // namespace

RunOutcome run_subcommand(const std::string& sub, const RunConfig& cfg, const RunContext& ctx) {
  const auto t0 = Clock::now();
  Outputs out(ctx, cfg);
  RunOutcome o;
  const int threads = resolve_threads(ctx.threads);
  try {
    if (sub == "validate") {
      o = do_validate(cfg, out);
    } else if (sub == "sweep") {
      o = do_sweep(cfg, out, threads);
    } else {
      const Model m = build_model(cfg);
      if (sub == "build") o = do_build(m, out);
      else if (sub == "fgr") o = do_fgr(m, out);
      else if (sub == "spectrum") o = do_spectrum(m, out);
      else if (sub == "certify") o = do_certify(m, out, threads);
      else if (sub == "diagnose") o = do_diagnose(m, out, threads);
      else if (sub == "selftest") o = do_selftest(m, ctx.seed);
      else throw ValidationError("unknown subcommand '" + sub + "'");
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const AccuracyError& e) {
    o.report["results"]["error"] = {{"type", "AccuracyError"}, {"what", e.what()}, {"coarse", e.coarse()},
                                    {"fine", e.fine()}};
    o.exit_code = kExitNumerical;
  } catch (const Error& e) {
    o.report["results"]["error"] = {{"type", "NumericalError"}, {"what", e.what()}};
    o.exit_code = kExitNumerical;
  }
  o.report["tool"] = "llab";
  o.report["subcommand"] = sub;
  o.report["config_hash"] = cfg.hash;
  o.report["config"] = cfg.raw;
  o.report["seed"] = ctx.seed;
  o.report["exit_code"] = o.exit_code;
  o.report["artifacts"] = out.files;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.report["timing"] = {{"wall_seconds", secs}, {"threads", threads}};
  out.write("report_" + sub + ".json", o.report.dump(2) + "\n");
  o.files = out.files;
  return o;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"llab: spectral analysis of truncated thermal Liouvillians"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  for (const auto& name : subcommands()) {
    auto* s = app.add_subcommand(name, "run the " + name + " stage");
    s->add_option("--config", config_path, "JSON config file")->required();
    s->add_option("--out", out_dir, "output directory (defaults to the config's outputs)");
    s->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) {
      seed = v;
      seed_given = true;
    }, "seed for randomized suites");
    s->add_option("--threads", threads, "worker threads (LLAB_THREADS overrides)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = load_config(config_path);
    RunContext ctx;
    ctx.out_dir = out_dir.empty() ? cfg.outputs : out_dir;
    ctx.seed = seed_given ? seed : cfg.seed;
    ctx.threads = threads;
    const RunOutcome o = run_subcommand(sub, cfg, ctx);
    std::cout << sub << ": exit " << o.exit_code << ", wrote " << o.files.size() << " files to " << ctx.out_dir
              << "\n";
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    return o.exit_code;
  } catch (const ValidationError& e) {
    std::cerr << "config error:\n";
    for (const auto& s : e.issues()) std::cerr << "  - " << s << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace llab
