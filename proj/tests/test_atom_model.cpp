#include <doctest.h>

#include <random>

#include "llab/atom_model.hpp"
#include "llab/errors.hpp"
#include "llab/linalg.hpp"

using namespace llab;

namespace {

AtomSpec two_level() {
  AtomSpec s;
  s.discrete_levels = {{-1.0, 1}, {-0.25, 1}};
  return s;
}

CMat random_complex(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(nd(gen), nd(gen));
  return a;
}

}  // namespace

TEST_CASE("hamiltonian of a two-level atom without continuum") {
  const CMat h = build_hamiltonian(two_level());
  CHECK(h.rows() == 2);
  CHECK(h(0, 0) == cplx(-1.0));
  CHECK(h(1, 1) == cplx(-0.25));
  CHECK(h(0, 1) == cplx(0.0));
  CHECK(is_exactly_hermitian(h));
}

TEST_CASE("uniform pseudo-continuum nodes") {
  AtomSpec s;
  s.discrete_levels = {{-0.5, 1}};
  s.continuum = make_continuum(0.1, 2.0, 4, ContinuumScheme::uniform);
  const RVec e = energies(build_hamiltonian(s));
  REQUIRE(e.size() == 5);
  const double h = 1.9 / 3.0;
  CHECK(e[0] == doctest::Approx(-0.5));
  CHECK(e[1] == doctest::Approx(0.1));
  CHECK(e[2] == doctest::Approx(0.1 + h).epsilon(1e-14));
  CHECK(e[3] == doctest::Approx(0.1 + 2 * h).epsilon(1e-14));
  CHECK(e[4] == 2.0);
  double wsum = 0;
  for (double w : s.continuum.quadrature_weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.9));
}

TEST_CASE("gauss-legendre continuum integrates polynomials") {
  const Continuum c = make_continuum(0.5, 3.0, 6, ContinuumScheme::gauss_legendre);
  double s = 0;
  for (int k = 0; k < 6; ++k) s += c.quadrature_weights[k] * std::pow(c.nodes[k], 9);
  CHECK(s == doctest::Approx((std::pow(3.0, 10) - std::pow(0.5, 10)) / 10).epsilon(1e-12));
  for (int k = 1; k < 6; ++k) CHECK(c.nodes[k - 1] < c.nodes[k]);
}

TEST_CASE("degenerate level has a rank-two projection") {
  AtomSpec s;
  s.discrete_levels = {{-1.0, 2}};
  const CMat h = build_hamiltonian(s);
  CHECK(h == CMat(-CMat::Identity(2, 2)));
  const CMat p = spectral_projection(h, -1.0);
  CHECK(p.trace().real() == 2.0);
  CHECK(s.basis_of_level(0) == IndexList{0, 1});
}

TEST_CASE("spectral projection") {
  const CMat h = build_hamiltonian(two_level());
  const CMat p = spectral_projection(h, -1.0, 1e-9);
  CHECK(p(0, 0) == cplx(1.0));
  CHECK(p(1, 1) == cplx(0.0));
  CHECK((p * p - p).norm() == 0.0);
  CHECK_THROWS_AS(spectral_projection(h, -0.999, 1e-9), EmptyProjectionError);
}

TEST_CASE("resolution of identity over clustered eigenvalues") {
  AtomSpec s;
  s.discrete_levels = {{-2.0, 1}, {-1.0, 3}};
  s.continuum = make_continuum(0.2, 1.0, 5, ContinuumScheme::uniform);
  const CMat h = build_hamiltonian(s);
  CMat sum = CMat::Zero(h.rows(), h.cols());
  for (double e : clustered_eigenvalues(h)) sum += spectral_projection(h, e);
  CHECK((sum - CMat::Identity(h.rows(), h.cols())).norm() == 0.0);
}

TEST_CASE("validation aggregates every problem") {
  AtomSpec s;
  s.discrete_levels = {{0.5, 1}, {-1.0, 0}};
  s.continuum = make_continuum(-0.2, -0.5, 3, ContinuumScheme::uniform);
  try {
    validate(s);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.issues().size() >= 4);
  }
}

TEST_CASE("mollified window profile") {
  const double r = 0.5, R = 1.5, m = 0.2;
  CHECK(bump_profile(1.0, r, R, m) == 1.0);
  CHECK(bump_profile(-1.0, r, R, m) == 0.0);
  const double mid = bump_profile(r - m / 2, r, R, m);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  CHECK(mid == doctest::Approx(std::exp(1.0 - 1.0 / 0.75)));
  double prev = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double v = bump_profile(r - m + k * m / 20, r, R, m);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(bump_profile(R + m, r, R, m) == 0.0);
}

TEST_CASE("regularized coupling") {
  AtomSpec s;
  s.discrete_levels = {{-1.0, 1}, {-0.5, 1}};
  s.continuum = make_continuum(0.6, 1.4, 3, ContinuumScheme::uniform);
  const CMat h = build_hamiltonian(s);
  const auto modes = s.modes();
  const CMat g = hermitize(random_complex(5, 11));

  SUBCASE("identity sandwich leaves G unchanged") {
    WindowSpec w{{0, 1}, 0.5, 1.5, 0.05};
    CHECK((regularize_coupling(g, h, w, modes) - g).norm() < 1e-15);
  }
  SUBCASE("empty window gives zero") {
    WindowSpec w{{}, 2.0, 3.0, 0.05};
    CHECK(regularize_coupling(g, h, w, modes).norm() == 0.0);
  }
  SUBCASE("matches a brute-force triple product") {
    WindowSpec w{{1}, 0.7, 1.2, 0.2};
    CMat q = CMat::Zero(5, 5);
    q(1, 1) = 1.0;
    const double e[3] = {0.6, 1.0, 1.4};
    for (int k = 0; k < 3; ++k) q(2 + k, 2 + k) = bump_profile(e[k], 0.7, 1.2, 0.2);
    CMat brute = CMat::Zero(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        for (int a = 0; a < 5; ++a)
          for (int b = 0; b < 5; ++b) brute(i, j) += q(i, a) * g(a, b) * q(b, j);
    const CMat reg = regularize_coupling(g, h, w, modes);
    CHECK((reg - brute).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(is_exactly_hermitian(reg));
  }
  SUBCASE("idempotent when the window profile is 0/1") {
    WindowSpec w{{0}, 0.5, 1.0, 0.05};
    const CMat once = regularize_coupling(g, h, w, modes);
    CHECK((regularize_coupling(once, h, w, modes) - once).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("continuum label in J_d is rejected") {
    WindowSpec w{{3}, 0.5, 1.0, 0.05};
    CHECK_THROWS_AS(regularize_coupling(g, h, w, modes), ValidationError);
    CHECK_THROWS_AS(validate(w, s, true), ValidationError);
  }
}

TEST_CASE("cp conjugation") {
  CMat real_sym(2, 2);
  real_sym << 1.0, 2.0, 2.0, 3.0;
  CHECK(cp_conjugate(real_sym) == real_sym);
  CMat g = CMat::Zero(2, 2);
  g(0, 1) = cplx(0, 1);
  g(1, 0) = cplx(0, -1);
  const CMat c = cp_conjugate(g);
  CHECK(c(0, 1) == cplx(0, -1));
  CHECK(c(1, 0) == cplx(0, 1));
  const CMat r = random_complex(6, 3);
  CHECK(cp_conjugate(cp_conjugate(r)) == r);
}

TEST_CASE("dark-state decoupling") {
  const CMat h = build_hamiltonian(two_level());
  const CMat g = decouple(dipole_like_coupling(h), {1});
  CHECK(g(0, 0) == cplx(1.0));
  CHECK(g.row(1).norm() == 0.0);
  CHECK(g.col(1).norm() == 0.0);
  CHECK(dipole_like_coupling(h, 2.0)(0, 1).real() == doctest::Approx(2.0 / 1.75));
  CHECK(dipole_like_coupling(h, 1.0, true)(0, 0) == cplx(0.0));
}
