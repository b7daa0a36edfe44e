#pragma once

#include "llab/types.hpp"

namespace llab {

struct HermitianEigen {
  RVec values;   // ascending
  CMat vectors;  // columns
};

// Dense Hermitian eigensolver (LAPACK zheevr). Only the lower triangle is read.
HermitianEigen eigh(const CMat& a);
RVec eigvalsh(const CMat& a);

// (A + A^H)/2, exactly Hermitian entrywise.
CMat hermitize(const CMat& a);
SpMat hermitize(const SpMat& a);

bool is_exactly_hermitian(const CMat& a);
double hermitian_defect(const SpMat& a);

// Support of a 0/1 diagonal mask.
IndexList support(const RVec& mask);
CMat dense_block(const SpMat& a, const IndexList& idx);
CMat dense_block(const SpMat& a, const IndexList& rows, const IndexList& cols);
SpMat diagonal(const RVec& d);
CMat mask_matrix(const RVec& mask);
double max_abs(const SpMat& a);

}  // namespace llab
