#pragma once

#include <vector>

namespace mreg {

// Finite-difference weights c[m][j] for the m-th derivative at z from nodes x (Fornberg).
std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& x, int max_order);

// Fourth-order Gregory weights for N >= 8 equispaced nodes (spacing 1); trapezoid below that.
std::vector<double> gregory_weights(std::size_t N);
double gregory_integral(const std::vector<double>& f, double h);

}  // namespace mreg
