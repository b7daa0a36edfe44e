#include "llab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#define lapack_complex_double std::complex<double>
#define lapack_complex_float std::complex<float>
#include <lapacke.h>

#include "llab/errors.hpp"

namespace llab {

namespace {
HermitianEigen solve(const CMat& a, bool vectors) {
  if (a.rows() != a.cols()) throw DomainError("eigh: matrix not square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  HermitianEigen out;
  out.values.resize(n);
  if (n == 0) return out;
  // zheevd from the system LAPACK returns wrong eigenvectors above a few hundred rows; MRRR is reliable.
  CMat w = a;
  CMat z = vectors ? CMat(n, n) : CMat(1, 1);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'A', 'L', n, w.data(), n, 0.0, 0.0, 0, 0,
                                   0.0, &found, out.values.data(), z.data(), vectors ? n : 1, isuppz.data());
  if (info != 0) throw Error("zheevr failed with info=" + std::to_string(info));
  if (vectors) out.vectors = std::move(z);
  return out;
}
}  // namespace

HermitianEigen eigh(const CMat& a) { return solve(a, true); }
RVec eigvalsh(const CMat& a) { return solve(a, false).values; }

CMat hermitize(const CMat& a) { return (a + a.adjoint()) * 0.5; }

SpMat hermitize(const SpMat& a) {
  SpMat adj = a.adjoint();
  SpMat out = (a + adj) * 0.5;
  out.prune(cplx(0.0));
  return out;
}

bool is_exactly_hermitian(const CMat& a) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = j; i < a.rows(); ++i)
      if (a(i, j) != std::conj(a(j, i))) return false;
  return true;
}

double hermitian_defect(const SpMat& a) {
  SpMat d = a - SpMat(a.adjoint());
  return max_abs(d);
}

IndexList support(const RVec& mask) {
  IndexList idx;
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    if (mask[i] != 0.0) idx.push_back(static_cast<int>(i));
  return idx;
}

CMat dense_block(const SpMat& a, const IndexList& idx) { return dense_block(a, idx, idx); }

CMat dense_block(const SpMat& a, const IndexList& rows, const IndexList& cols) {
  std::vector<int> rpos(a.rows(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rpos[rows[i]] = static_cast<int>(i);
  CMat out = CMat::Zero(rows.size(), cols.size());
  for (std::size_t jj = 0; jj < cols.size(); ++jj)
    for (SpMat::InnerIterator it(a, cols[jj]); it; ++it) {
      int r = rpos[it.row()];
      if (r >= 0) out(r, jj) += it.value();
    }
  return out;
}

SpMat diagonal(const RVec& d) {
  SpMat out(d.size(), d.size());
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) t.emplace_back(i, i, d[i]);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

CMat mask_matrix(const RVec& mask) { return mask.cast<cplx>().asDiagonal(); }

double max_abs(const SpMat& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace llab
