#pragma once

#include <Eigen/Dense>

namespace qswitch {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/* Matrix exponential by scaling and squaring with the degree-13 Pade
 * approximant (Higham 2005). Accurate to a few ulps of the result norm for
 * the small dense matrices used here. */
Mat expm(const Mat& a);

/* Largest eigenvalue of the symmetric part (A + A^T)/2. */
double max_symmetric_eigenvalue(const Mat& a);

/* Smallest eigenvalue of a symmetric matrix. */
double min_eigenvalue_symmetric(const Mat& m);

bool is_symmetric_positive_definite(const Mat& m);

bool all_finite(const Mat& m);

}  // namespace qswitch
