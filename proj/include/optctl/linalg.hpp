#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <utility>

namespace optctl {

/// Dense LU factorization with partial (row) pivoting, PA = LU.
///
/// A pivot whose magnitude falls below `relative_tolerance * max|A|` marks the
/// matrix as singular; solve() must not be called in that case.
class DenseLU {
 public:
  explicit DenseLU(Eigen::MatrixXd a, double relative_tolerance = 1e-12) : lu_(std::move(a)) {
    const Eigen::Index n = lu_.rows();
    perm_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) perm_(i) = i;
    const double scale = n > 0 ? lu_.cwiseAbs().maxCoeff() : 0.0;
    const double threshold = relative_tolerance * (scale > 0.0 ? scale : 1.0);

    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::Index p = 0;
      const double pivot = lu_.col(k).tail(n - k).cwiseAbs().maxCoeff(&p);
      p += k;
      if (!(pivot > threshold)) {
        singular_ = true;
        return;
      }
      if (p != k) {
        lu_.row(k).swap(lu_.row(p));
        std::swap(perm_(k), perm_(p));
      }
      const Eigen::Index rest = n - k - 1;
      if (rest == 0) continue;
      lu_.col(k).tail(rest) /= lu_(k, k);
      lu_.bottomRightCorner(rest, rest).noalias() -= lu_.col(k).tail(rest) * lu_.row(k).tail(rest);
    }
  }

  bool singular() const { return singular_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const Eigen::Index n = lu_.rows();
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = b(perm_(i));
    lu_.triangularView<Eigen::UnitLower>().solveInPlace(x);
    lu_.triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
  }

 private:
  Eigen::MatrixXd lu_;
  Eigen::VectorXi perm_;
  bool singular_ = false;
};

}  // namespace optctl
