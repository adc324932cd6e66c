#pragma once

#include <Eigen/Dense>

namespace mreg {

// Unitary DFT along each column (length must be a power of two).
void fft_columns(Eigen::MatrixXcd& x);
void ifft_columns(Eigen::MatrixXcd& x);

Eigen::MatrixXcd fft(const Eigen::MatrixXcd& x);
Eigen::MatrixXcd ifft(const Eigen::MatrixXcd& x);

}  // namespace mreg
