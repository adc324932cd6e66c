#pragma once

#include <random>

#include <Eigen/Dense>

#include "mreg/gelfand.hpp"

namespace mreg {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b);
Eigen::MatrixXcd random_complex(Eigen::Index r, Eigen::Index c, Rng& rng);
// Real SPD matrix with eigenvalues log-uniform in [1, cond].
Eigen::MatrixXd random_spd(Eigen::Index d, Rng& rng, double cond = 100.0);
// Normalized matrix C = P + tK with Herm(C) = P, lambda_min(P) = eta and ||C|| = M exactly.
Eigen::MatrixXcd random_normalized_form(Eigen::Index d, double eta, double M, Rng& rng);
// A = B^{1/2} C B^{1/2} for such a C.
Eigen::MatrixXcd random_coercive_matrix(const GelfandTriple& T, double eta, double M, Rng& rng);

}  // namespace mreg
