#include <doctest.h>

#include <algorithm>
#include <random>

#include "llab/errors.hpp"
#include "llab/liouvillian.hpp"
#include "test_models.hpp"

using namespace llab;
using llab::testing::small_model;
using llab::testing::small_model_json;

namespace {

std::vector<double> sorted(const RVec& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

TEST_CASE("free Liouvillian spectrum") {
  AtomSpec s;
  s.discrete_levels = {{-1.0, 1}, {-0.25, 1}};
  const CMat h = build_hamiltonian(s);
  SUBCASE("vacuum sector of a two-level atom") {
    const LiouvilleOperator l0 = assemble_L0(h, RVec::Zero(1), 1);
    const auto ev = sorted(eigvalsh(CMat(l0.matrix)));
    REQUIRE(ev.size() == 4);
    CHECK(ev[0] == doctest::Approx(-0.75));
    CHECK(ev[1] == 0.0);
    CHECK(ev[2] == 0.0);
    CHECK(ev[3] == doctest::Approx(0.75));
  }
  SUBCASE("zero-photon kernel counts equal-energy pairs") {
    AtomSpec t;
    t.discrete_levels = {{-1.0, 2}, {-0.25, 1}};
    const CMat ht = build_hamiltonian(t);
    const LiouvilleOperator l0 = assemble_L0(ht, RVec::Zero(1), 1);
    int zeros = 0;
    for (double v : sorted(l0.matrix.diagonal().real())) zeros += v == 0.0;
    CHECK(zeros == degenerate_pair_count(ht));
    CHECK(zeros == 5);
  }
  SUBCASE("spectrum is symmetric under negation") {
    const DoubledGrid g = make_doubled_grid(1.3, 4);
    const FockSpace F(4, 2);
    const LiouvilleOperator l0 = assemble_L0(h, second_quantize_diagonal(g.nodes, F), F.dimension());
    const auto ev = sorted(l0.matrix.diagonal().real());
    for (std::size_t k = 0; k < ev.size(); ++k) CHECK(std::abs(ev[k] + ev[ev.size() - 1 - k]) <= 1e-12);
  }
}

TEST_CASE("interaction assembly") {
  SUBCASE("hand-assembled single-mode interaction") {
    DoubledGrid g;
    g.nodes = RVec::Constant(1, 0.7);
    g.weights = RVec::Constant(1, 0.3);
    const FockSpace F(1, 1);
    CMat G(2, 2);
    G << 0.4, cplx(0.1, 0.2), cplx(0.1, -0.2), -0.3;
    InteractionData data;
    data.couplings = {G};
    const cplx fl(0.9, 0.25), fr(-0.35, 0.6);
    data.left = {CVec::Constant(1, fl)};
    data.right = {CVec::Constant(1, fr)};
    const CMat got = CMat(assemble_interaction(data, 2, g, F, 1.0).matrix);
    REQUIRE(got.rows() == 8);
    // phi(f) = (sqrt(w) conj(f) a + sqrt(w) f a^*) / sqrt(2), a = |0><1|
    auto phi = [&](cplx f, int r, int c) -> cplx {
      const double s = std::sqrt(0.3 / 2);
      if (r == 0 && c == 1) return s * std::conj(f);
      if (r == 1 && c == 0) return s * f;
      return 0.0;
    };
    CMat want = CMat::Zero(8, 8);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int i2 = 0; i2 < 2; ++i2)
            for (int j2 = 0; j2 < 2; ++j2)
              for (int k2 = 0; k2 < 2; ++k2) {
                cplx v = 0;
                if (j == j2) v += G(i, i2) * phi(fl, k, k2);
                if (i == i2) v -= std::conj(G(j, j2)) * phi(fr, k, k2);
                want((i * 2 + j) * 2 + k, (i2 * 2 + j2) * 2 + k2) = v;
              }
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("zero couplings") {
    Model m = small_model();
    InteractionData data = m.data;
    for (auto& c : data.couplings) c.setZero();
    CHECK(max_abs(assemble_interaction(data, m.space.d, m.grid, m.fock, m.beta).matrix) == 0.0);
  }
  SUBCASE("vacuum-to-vacuum block vanishes and I is Hermitian") {
    Model m = small_model();
    const IndexList pi = support(m.kit.pi);
    REQUIRE(!pi.empty());
    CHECK(dense_block(m.interaction.matrix, pi).cwiseAbs().maxCoeff() == 0.0);
    CHECK(hermitian_defect(m.interaction.matrix) == 0.0);
  }
}

TEST_CASE("coupled Liouvillian") {
  Model m = small_model();
  CHECK(max_abs(SpMat(m.L(0.0) - m.l0.matrix)) == 0.0);
  const SpMat l1 = m.L(0.03), l2 = m.L(0.06);
  CHECK(max_abs(SpMat((l2 - m.l0.matrix) - 2.0 * (l1 - m.l0.matrix))) < 1e-15);
  CHECK(hermitian_defect(l1) == 0.0);
  SUBCASE("spectrum of L_lambda is symmetric under negation") {
    const auto ev = sorted(eigvalsh(CMat(l1)));
    for (std::size_t k = 0; k < ev.size(); ++k) CHECK(std::abs(ev[k] + ev[ev.size() - 1 - k]) <= 1e-12);
  }
}

TEST_CASE("projection family") {
  Model m = small_model();
  const RVec total = m.kit.p + m.kit.p_left + m.kit.p_right + m.kit.p_zero;
  CHECK(total == RVec::Ones(total.size()));
  CHECK(m.kit.pi == m.kit.p0.cwiseProduct(m.kit.p_omega));
  CHECK(m.kit.pi.sum() == 2.0);
  for (const RVec* q : {&m.kit.pi, &m.kit.p, &m.kit.e_delta})
    CHECK(q->cwiseProduct(*q) == *q);

  SUBCASE("full window gives P = 1") {
    json j = small_model_json();
    j["window"]["R"] = 0.99;
    j["window"]["margin"] = 0.15;
    Model full = build_model(parse_config(j));
    CHECK(full.kit.p == RVec::Ones(full.kit.p.size()));
    CHECK(full.kit.p_left.sum() == 0.0);
    CHECK(full.kit.p_zero.sum() == 0.0);
  }
  SUBCASE("Delta above half the smallest gap names the gap") {
    json j = small_model_json();
    j["params"]["delta_width"] = 0.5;
    try {
      parse_config(j);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("0.45") != std::string::npos);
    }
    CHECK(max_delta_width(m.hp, m.cfg.window) == doctest::Approx(0.45));
  }
}

TEST_CASE("block reduction") {
  Model m = small_model();
  for (double lam : {0.0, 0.01, 0.1}) {
    const auto r = block_reduction_check(m.L(lam), m.l0.matrix, m.kit);
    CHECK(r.pass);
    if (lam == 0.0) {
      CHECK(r.max_commutator == 0.0);
      CHECK(r.p_zero_defect == 0.0);
    }
  }
  SUBCASE("unregularized couplings break the reduction") {
    const InteractionData raw = interaction_data(m.raw_couplings, m.form_factors, m.beta, m.grid, kIsotropicAngularFactor);
    const LiouvilleOperator i = assemble_interaction(raw, m.space.d, m.grid, m.fock, m.beta);
    const auto r = block_reduction_check(SpMat(m.l0.matrix + 0.1 * i.matrix), m.l0.matrix, m.kit);
    CHECK_FALSE(r.pass);
    CHECK(r.max_commutator > 1e-3);
  }
}

TEST_CASE("kernel report") {
  SUBCASE("discrete-only model at lambda = 0") {
    json j = small_model_json();
    j["atom"]["continuum"]["n_points"] = 0;
    j["atom"]["discrete_levels"] = json::parse(R"([{"energy": -2.0}, {"energy": -1.1, "degeneracy": 2}])");
    j["window"]["coupled_levels"] = {0, 1};
    Model m = build_model(parse_config(j));
    const KernelReport k = kernel_report(m.L(0.0), m.kit, 1e-12);
    CHECK(static_cast<int>(k.candidates.size()) == degenerate_pair_count(m.hp));
    for (const auto& c : k.candidates) CHECK(c.overlap_pi == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("uncoupled degenerate pairs persist in the P^0 block") {
    json j = small_model_json();
    j["atom"]["discrete_levels"] = json::parse(R"([{"energy": -2.0}, {"energy": -1.1}, {"energy": -0.6}])");
    j["window"]["coupled_levels"] = {0, 1};
    Model m = build_model(parse_config(j));
    const IndexList blk = support(m.kit.p_zero);
    const KernelReport k = kernel_report(m.L(0.05), m.kit, 1e-12, blk);
    int pair = -1;
    for (const auto& c : k.candidates)
      if (std::abs(c.eigenvector[m.space.index(2, 2, 0)]) > 0.5) pair = 1;
    CHECK(pair == 1);
  }
  SUBCASE("gapped perturbation has no kernel candidates") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    const int n = 12;
    CMat x(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) x(a, b) = cplx(nd(gen), nd(gen));
    CMat l = hermitize(x) * 0.01;
    for (int a = 0; a < n; ++a) l(a, a) += (a % 2 ? 1.0 : -1.0) * (1.0 + a);
    ProjectionKit kit;
    for (RVec* q : {&kit.pi, &kit.p0, &kit.p_omega}) *q = RVec::Zero(n);
    const KernelReport k = kernel_report(to_sparse(l), kit, 1e-3);
    CHECK(k.candidates.empty());
    CHECK(k.min_abs_eigenvalue > 0.5);
  }
}

TEST_CASE("evolution") {
  Model m = small_model();
  const CMat l = CMat(m.L(0.05));
  const HermitianEigen eig = eigh(l);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  CVec psi(l.rows());
  for (Eigen::Index a = 0; a < psi.size(); ++a) psi[a] = cplx(nd(gen), nd(gen));
  CHECK(evolve(l, psi, 0.0) == psi);
  CHECK(evolve(eig, psi, 3.7).norm() == doctest::Approx(psi.norm()).epsilon(1e-12));
  const CVec v = eig.vectors.col(4);
  CHECK((evolve(eig, v, 2.0) - std::exp(cplx(0, 2.0 * eig.values[4])) * v).norm() < 1e-12);
}
