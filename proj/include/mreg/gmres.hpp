#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace mreg {

using LinearMap = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

struct GmresOptions {
  double tol = 1e-10;  // relative residual ||b - A x|| / ||b||
  int max_iter = 600;
  int restart = 80;
};

struct GmresResult {
  Eigen::VectorXcd x;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;  // relative residual after each inner step
};

// Restarted GMRES with right preconditioner M^{-1}: solves A M^{-1} y = b, x = M^{-1} y.
GmresResult gmres(const LinearMap& A, const LinearMap& Minv, const Eigen::VectorXcd& b, const Eigen::VectorXcd& x0,
                  const GmresOptions& opt);

}  // namespace mreg
