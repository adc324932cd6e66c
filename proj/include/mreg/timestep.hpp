#pragma once

#include <functional>
#include <vector>

#include "mreg/nonauto_form.hpp"

namespace mreg {

// Independent time-stepping cross-check for the collocation solver.

using Forcing = std::function<Eigen::VectorXcd(double)>;

// (I + k/2 A_{j+1}) u_{j+1} = (I - k/2 A_j) u_j + k/2 (f_j + f_{j+1}); returns u at all steps + 1 nodes.
std::vector<Eigen::VectorXcd> crank_nicolson(const MatrixSampler& A, const Forcing& f, const Eigen::VectorXcd& u0,
                                             double t0, double t1, std::size_t steps);
// (4 u_{2N} - u_N) / 3 at the N-step nodes.
std::vector<Eigen::VectorXcd> crank_nicolson_richardson(const MatrixSampler& A, const Forcing& f,
                                                        const Eigen::VectorXcd& u0, double t0, double t1,
                                                        std::size_t steps);

// Periodic solution on the torus: u(-L/2) = (I - Phi)^{-1} psi for the one-period map u -> Phi u + psi.
// Steps are `oversample` per grid spacing; values returned at the grid nodes.
Signal crank_nicolson_periodic(const MatrixSampler& A, const Forcing& f, const TimeGrid& grid, Eigen::Index dim,
                               std::size_t oversample, bool richardson);

// Band-limited interpolant of a torus signal (Nyquist mode as a cosine).
Forcing spectral_interpolant(const Signal& f);

// Local Lagrange interpolation through `points` window nodes (no Gibbs ringing at window ends).
Forcing window_interpolant(const Signal& f, int points = 8);

}  // namespace mreg
