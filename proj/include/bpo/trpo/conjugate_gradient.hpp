#pragma once

#include <Eigen/Dense>

namespace bpo::trpo {

/// Conjugate gradient for A x = b with A symmetric positive definite, given
/// only the product x -> A x. Stops when r.r < residual_tol; returns the
/// iterate with the smallest residual seen.
template <typename MatVec>
Eigen::VectorXd conjugate_gradient(MatVec&& matvec, const Eigen::VectorXd& b, int max_iters = 10,
                                   double residual_tol = 1e-10) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = b;
  double rr = r.squaredNorm();
  Eigen::VectorXd best = x;
  double best_rr = rr;
  for (int k = 0; k < max_iters && rr >= residual_tol; ++k) {
    const Eigen::VectorXd ap = matvec(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rr_next = r.squaredNorm();
    if (rr_next < best_rr) {
      best = x;
      best_rr = rr_next;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return best;
}

}  // namespace bpo::trpo
