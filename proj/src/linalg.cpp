#include "qswitch/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qswitch {

namespace {

// Coefficients of the (13,13) Pade approximant of exp.
constexpr double kPade13[] = {64764752532480000.0,
                              32382376266240000.0,
                              7771770303897600.0,
                              1187353796428800.0,
                              129060195264000.0,
                              10559470521600.0,
                              670442572800.0,
                              33522128640.0,
                              1323241920.0,
                              40840800.0,
                              960960.0,
                              16380.0,
                              182.0,
                              1.0};

// Largest 1-norm for which the degree-13 approximant needs no scaling.
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Mat expm(const Mat& a) {
  const Eigen::Index n = a.rows();
  const Mat id = Mat::Identity(n, n);
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) return id;

  int squarings = 0;
  if (norm1 > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  }
  const Mat as = a / std::ldexp(1.0, squarings);

  const auto& b = kPade13;
  const Mat a2 = as * as;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const Mat u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                      b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  const Mat u = as * u_inner;
  const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                b[4] * a4 + b[2] * a2 + b[0] * id;

  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) {
    r = r * r;
  }
  return r;
}

double max_symmetric_eigenvalue(const Mat& a) {
  const Mat sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

double min_eigenvalue_symmetric(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool is_symmetric_positive_definite(const Mat& m) {
  if (m.rows() != m.cols() || !all_finite(m)) return false;
  if (!m.isApprox(m.transpose(), 1e-12)) return false;
  Eigen::LLT<Mat> llt(m);
  return llt.info() == Eigen::Success;
}

bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace qswitch
